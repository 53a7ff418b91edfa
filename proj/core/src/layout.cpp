#include "guifix/layout.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "guifix/error.hpp"
#include "guifix/io.hpp"

namespace guifix {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace pt = boost::property_tree;

// Case-sensitive on purpose: "Context" must not read as "Text".
bool contains(std::string_view hay, std::string_view needle) {
  return hay.find(needle) != std::string_view::npos;
}

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// "[l,t][r,b]" -> {l, t, r-l, b-t}
std::optional<Rect> parse_uiautomator_bounds(std::string_view s) {
  std::vector<double> nums;
  std::size_t i = 0;
  for (int group = 0; group < 2; ++group) {
    if (i >= s.size() || s[i] != '[') return std::nullopt;
    const std::size_t close = s.find(']', i);
    if (close == std::string_view::npos) return std::nullopt;
    std::string_view inner = s.substr(i + 1, close - i - 1);
    const std::size_t comma = inner.find(',');
    if (comma == std::string_view::npos) return std::nullopt;
    auto a = parse_number(inner.substr(0, comma));
    auto b = parse_number(inner.substr(comma + 1));
    if (!a || !b) return std::nullopt;
    nums.push_back(*a);
    nums.push_back(*b);
    i = close + 1;
  }
  if (i != s.size()) return std::nullopt;
  return Rect{nums[0], nums[1], nums[2] - nums[0], nums[3] - nums[1]};
}

class IdAssigner {
 public:
  std::string assign(std::optional<std::string> declared) {
    std::string id = declared && !declared->empty() ? *declared : "n" + std::to_string(counter_);
    ++counter_;
    if (!seen_.insert(id).second) throw ParseError("duplicate node id '" + id + "'");
    return id;
  }

 private:
  std::size_t counter_ = 0;
  std::set<std::string> seen_;
};

void validate_geometry(const ViewNode& n) {
  if (n.bounds_px.w < 0.0 || n.bounds_px.h < 0.0) {
    throw ParseError("negative extent at node " + n.id);
  }
}

void finalize_dp(ViewNode& node, double density) {
  node.bounds = px_to_dp(node.bounds_px, density);
  for (auto& c : node.children) finalize_dp(c, density);
}

// --- XML ----------------------------------------------------------------

std::optional<std::string> xml_attr(const pt::ptree& node, const char* name) {
  if (auto attrs = node.get_child_optional("<xmlattr>")) {
    if (auto v = attrs->get_optional<std::string>(name)) return *v;
  }
  return std::nullopt;
}

ViewNode parse_xml_node(const pt::ptree& xml, IdAssigner& ids) {
  ViewNode node;
  node.id = ids.assign(xml_attr(xml, "id"));
  node.class_name = xml_attr(xml, "class").value_or("");
  node.view_class = classify_class_name(node.class_name);
  const auto bounds = xml_attr(xml, "bounds");
  if (!bounds) throw ParseError("missing bounds at node " + node.id);
  auto rect = parse_uiautomator_bounds(*bounds);
  if (!rect) throw ParseError("non-numeric geometry at node " + node.id);
  node.bounds_px = *rect;
  validate_geometry(node);
  if (auto color = xml_attr(xml, "color"); color && !color->empty()) node.color = parse_hex(*color);
  if (auto text = xml_attr(xml, "text"); text && !text->empty()) node.text = *text;
  for (const auto& [tag, child] : xml) {
    if (tag == "node") node.children.push_back(parse_xml_node(child, ids));
  }
  return node;
}

ViewTree parse_xml(std::string_view raw) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(raw)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed XML document: ") + e.what());
  }
  const pt::ptree* container = &doc;
  pt::ptree hierarchy;
  if (auto h = doc.get_child_optional("hierarchy")) {
    hierarchy = *h;
    container = &hierarchy;
  }

  IdAssigner ids;
  std::vector<ViewNode> tops;
  for (const auto& [tag, child] : *container) {
    if (tag == "node") tops.push_back(parse_xml_node(child, ids));
  }
  if (tops.empty()) throw ParseError("malformed XML document: no <node> elements");

  ViewTree tree;
  auto number_attr = [&](const char* name) -> std::optional<double> {
    auto v = xml_attr(*container, name);
    if (!v) return std::nullopt;
    auto n = parse_number(*v);
    if (!n) throw ParseError(std::string("non-numeric screen attribute '") + name + "'");
    return n;
  };

  if (tops.size() == 1) {
    tree.root = std::move(tops.front());
  } else {
    double r = 0.0, b = 0.0;
    for (const auto& t : tops) {
      r = std::max(r, t.bounds_px.right());
      b = std::max(b, t.bounds_px.bottom());
    }
    tree.root.id = ids.assign(std::nullopt);
    tree.root.class_name = "ViewGroup";
    tree.root.view_class = ViewClass::ViewGroup;
    tree.root.bounds_px = {0.0, 0.0, r, b};
    tree.root.children = std::move(tops);
  }

  tree.screen.width_px = static_cast<int>(number_attr("width").value_or(tree.root.bounds_px.right()));
  tree.screen.height_px = static_cast<int>(number_attr("height").value_or(tree.root.bounds_px.bottom()));
  tree.screen.density = number_attr("density").value_or(1.0);
  if (auto bg = xml_attr(*container, "background")) tree.screen.background_color = parse_hex(*bg);
  return tree;
}

// --- JSON ---------------------------------------------------------------

Rgb json_color(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ParseError("color must be [r,g,b] at " + where);
  Rgb c;
  int* ch[3] = {&c.r, &c.g, &c.b};
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw ParseError("non-numeric color at " + where);
    const double v = j[i].get<double>();
    if (v < 0.0 || v > 255.0 || v != std::floor(v)) throw ParseError("color channel out of range at " + where);
    *ch[i] = static_cast<int>(v);
  }
  return c;
}

ViewNode parse_json_node(const nlohmann::json& j, IdAssigner& ids) {
  if (!j.is_object()) throw ParseError("node must be an object");
  ViewNode node;
  std::optional<std::string> declared;
  if (j.contains("id") && !j["id"].is_null()) {
    if (!j["id"].is_string()) throw ParseError("node id must be a string");
    declared = j["id"].get<std::string>();
  }
  node.id = ids.assign(declared);
  if (j.contains("class") && j["class"].is_string()) node.class_name = j["class"].get<std::string>();
  node.view_class = classify_class_name(node.class_name);

  if (!j.contains("bounds") || j["bounds"].is_null()) throw ParseError("missing bounds at node " + node.id);
  const auto& b = j["bounds"];
  if (!b.is_array() || b.size() != 4) throw ParseError("non-numeric geometry at node " + node.id);
  double v[4];
  for (int i = 0; i < 4; ++i) {
    if (!b[i].is_number()) throw ParseError("non-numeric geometry at node " + node.id);
    v[i] = b[i].get<double>();
    if (!std::isfinite(v[i])) throw ParseError("non-numeric geometry at node " + node.id);
  }
  node.bounds_px = {v[0], v[1], v[2], v[3]};
  validate_geometry(node);

  if (j.contains("color") && !j["color"].is_null()) node.color = json_color(j["color"], "node " + node.id);
  if (j.contains("text") && !j["text"].is_null()) {
    if (!j["text"].is_string()) throw ParseError("text must be a string at node " + node.id);
    node.text = j["text"].get<std::string>();
  }
  if (j.contains("children")) {
    if (!j["children"].is_array()) throw ParseError("children must be an array at node " + node.id);
    for (const auto& c : j["children"]) node.children.push_back(parse_json_node(c, ids));
  }
  return node;
}

ViewTree parse_json(std::string_view raw) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("screen") || !doc.contains("root")) {
    throw ParseError("malformed JSON document: expected {screen, root}");
  }
  ViewTree tree;
  const auto& s = doc["screen"];
  try {
    tree.screen.width_px = s.at("width_px").get<int>();
    tree.screen.height_px = s.at("height_px").get<int>();
    tree.screen.density = s.at("density").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed screen block: ") + e.what());
  }
  if (s.contains("background_color") && !s["background_color"].is_null()) {
    tree.screen.background_color = json_color(s["background_color"], "screen");
  }
  IdAssigner ids;
  tree.root = parse_json_node(doc["root"], ids);
  return tree;
}

ordered_json node_to_json(const ViewNode& n) {
  ordered_json j;
  j["id"] = n.id;
  j["class"] = n.class_name;
  j["bounds"] = {n.bounds_px.x, n.bounds_px.y, n.bounds_px.w, n.bounds_px.h};
  if (n.color) j["color"] = {n.color->r, n.color->g, n.color->b};
  else j["color"] = nullptr;
  if (n.text) j["text"] = *n.text;
  else j["text"] = nullptr;
  j["children"] = ordered_json::array();
  for (const auto& c : n.children) j["children"].push_back(node_to_json(c));
  return j;
}

template <class Node>
Node* find_impl(Node& n, std::string_view id) {
  if (n.id == id) return &n;
  for (auto& c : n.children) {
    if (auto* hit = find_impl(c, id)) return hit;
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(ViewClass c) {
  switch (c) {
    case ViewClass::Button: return "Button";
    case ViewClass::Text: return "Text";
    case ViewClass::Image: return "Image";
    case ViewClass::ViewGroup: return "ViewGroup";
    case ViewClass::Other: return "Other";
  }
  return "Other";
}

ViewClass classify_class_name(std::string_view declared) {
  if (contains(declared, "Button")) return ViewClass::Button;
  if (contains(declared, "Text")) return ViewClass::Text;
  if (contains(declared, "Image")) return ViewClass::Image;
  if (contains(declared, "Layout") || contains(declared, "ViewGroup") ||
      contains(declared, "Recycler")) {
    return ViewClass::ViewGroup;
  }
  return ViewClass::Other;
}

ViewTree parse_hierarchy(std::string_view raw, DumpFormat format) {
  ViewTree tree = format == DumpFormat::Xml ? parse_xml(raw) : parse_json(raw);
  if (!(tree.screen.density > 0.0) || !std::isfinite(tree.screen.density)) {
    throw ParseError("density must be positive");
  }
  if (!tree.screen.background_color.valid()) throw ParseError("background color out of range");
  finalize_dp(tree.root, tree.screen.density);
  return tree;
}

ViewTree load_view_tree(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  const auto format = (ext == ".xml" || ext == ".XML") ? DumpFormat::Xml : DumpFormat::Json;
  return parse_hierarchy(read_file(path), format);
}

std::string serialize_json(const ViewTree& tree) {
  ordered_json j;
  j["screen"] = {{"width_px", tree.screen.width_px},
                 {"height_px", tree.screen.height_px},
                 {"density", tree.screen.density},
                 {"background_color",
                  {tree.screen.background_color.r, tree.screen.background_color.g,
                   tree.screen.background_color.b}}};
  j["root"] = node_to_json(tree.root);
  return j.dump(2) + "\n";
}

ViewNode* find_node(ViewNode& root, std::string_view id) { return find_impl(root, id); }
const ViewNode* find_node(const ViewNode& root, std::string_view id) { return find_impl(root, id); }

Rect px_to_dp(const Rect& px, double density) {
  return {px.x / density, px.y / density, px.w / density, px.h / density};
}

void set_bounds_px(ViewNode& node, const Rect& px, double density) {
  node.bounds_px = px;
  node.bounds = px_to_dp(px, density);
}

void set_bounds_dp(ViewNode& node, const Rect& dp, double density) {
  node.bounds = dp;
  node.bounds_px = dp.scaled(density);
}

std::size_t count_nodes(const ViewNode& root) {
  std::size_t n = 1;
  for (const auto& c : root.children) n += count_nodes(c);
  return n;
}

std::size_t count_leaves(const ViewNode& root) {
  if (root.children.empty()) return 1;
  std::size_t n = 0;
  for (const auto& c : root.children) n += count_leaves(c);
  return n;
}

Rgb sample_colors(const Raster& raster, const Rect& region, std::span<const Rect> exclusions) {
  if (region.x < 0.0 || region.y < 0.0 || region.right() > raster.width ||
      region.bottom() > raster.height || region.empty()) {
    throw Error("sample region outside raster");
  }
  struct Bucket {
    std::size_t count = 0;
    double r = 0, g = 0, b = 0;
  };
  std::map<std::uint32_t, Bucket> histogram;
  const int x0 = static_cast<int>(std::floor(region.x));
  const int y0 = static_cast<int>(std::floor(region.y));
  const int x1 = static_cast<int>(std::ceil(region.right()));
  const int y1 = static_cast<int>(std::ceil(region.bottom()));
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      if (!region.contains_point(cx, cy)) continue;
      const bool excluded = std::any_of(exclusions.begin(), exclusions.end(),
                                        [&](const Rect& e) { return e.contains_point(cx, cy); });
      if (excluded) continue;
      const Rgb c = raster.at(x, y);
      const std::uint32_t key = Rgb{c.r / 16, c.g / 16, c.b / 16}.packed();
      auto& bucket = histogram[key];
      ++bucket.count;
      bucket.r += c.r;
      bucket.g += c.g;
      bucket.b += c.b;
    }
  }
  if (histogram.empty()) throw Error("empty sample region after exclusions");
  // std::map iterates keys ascending, so strict '>' keeps the lowest key on ties.
  auto best = histogram.begin();
  for (auto it = histogram.begin(); it != histogram.end(); ++it) {
    if (it->second.count > best->second.count) best = it;
  }
  const auto& b = best->second;
  const double n = static_cast<double>(b.count);
  return {static_cast<int>(std::lround(b.r / n)), static_cast<int>(std::lround(b.g / n)),
          static_cast<int>(std::lround(b.b / n))};
}

namespace {

void fill_node_colors(ViewNode& node, const Raster& raster) {
  for (auto& c : node.children) fill_node_colors(c, raster);
  if (!is_visible_class(node.view_class) || node.color || node.bounds_px.empty()) return;
  std::vector<Rect> exclusions;
  for (const auto& c : node.children) exclusions.push_back(c.bounds_px);
  node.color = sample_colors(raster, node.bounds_px, exclusions);
}

void collect_visible(const ViewNode& node, std::vector<Rect>& out) {
  if (is_visible_class(node.view_class) && !node.bounds_px.empty()) out.push_back(node.bounds_px);
  for (const auto& c : node.children) collect_visible(c, out);
}

}  // namespace

void fill_colors_from_screenshot(ViewTree& tree, const Raster& raster) {
  if (raster.width != tree.screen.width_px || raster.height != tree.screen.height_px) {
    throw Error("screenshot size " + std::to_string(raster.width) + "x" + std::to_string(raster.height) +
                " does not match screen " + std::to_string(tree.screen.width_px) + "x" +
                std::to_string(tree.screen.height_px));
  }
  std::vector<Rect> visible;
  collect_visible(tree.root, visible);
  tree.screen.background_color =
      sample_colors(raster, Rect{0.0, 0.0, double(raster.width), double(raster.height)}, visible);
  fill_node_colors(tree.root, raster);
}

}  // namespace guifix
