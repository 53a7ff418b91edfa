#include "guifix/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

#include "guifix/error.hpp"
#include "guifix/fix.hpp"
#include "guifix/graph.hpp"
#include "guifix/random.hpp"
#include "guifix/wireframe.hpp"

namespace guifix {

std::string_view to_string(LayoutPattern p) {
  switch (p) {
    case LayoutPattern::Row: return "row";
    case LayoutPattern::Column: return "column";
    case LayoutPattern::Grid: return "grid";
  }
  return "row";
}

LayoutPattern layout_pattern_from_string(std::string_view s) {
  if (s == "row") return LayoutPattern::Row;
  if (s == "column") return LayoutPattern::Column;
  if (s == "grid") return LayoutPattern::Grid;
  throw Error("unknown layout pattern '" + std::string(s) + "'");
}

void SynthConfig::validate() const {
  thresholds.validate();
  if (!(screen_width_dp > 0 && screen_height_dp > 0 && density > 0)) throw Error("synth: screen must be positive");
  if (min_containers < 1 || max_containers < min_containers) throw Error("synth: bad container range");
  if (min_components < 1 || max_components < min_components) throw Error("synth: bad component range");
  if (patterns.empty()) throw Error("synth: no layout patterns enabled");
  if (min_size < thresholds.min_touch_dp || max_size < min_size) {
    throw Error("synth: size range must start at or above the touch-target threshold");
  }
  if (min_interval < thresholds.min_interval_dp || max_interval < min_interval) {
    throw Error("synth: interval range must start at or above the interval threshold");
  }
  if (padding < 0) throw Error("synth: padding must be non-negative");
  if (2 * padding + min_size > screen_width_dp) throw Error("synth: screen too narrow for one component");
  if (button_share < 0 || text_share < 0 || button_share + text_share > 1.0) throw Error("synth: bad class shares");
  const double needed = std::max({thresholds.min_text_contrast, thresholds.min_large_text_contrast,
                                  thresholds.min_nontext_contrast});
  if (min_contrast < needed) throw Error("synth: palette contrast floor below the detector thresholds");
  if (backgrounds.empty()) throw Error("synth: no background colors");
  for (const auto& bg : backgrounds) {
    const bool any = std::any_of(foregrounds.begin(), foregrounds.end(),
                                 [&](Rgb fg) { return contrast_ratio(fg, bg) >= min_contrast; });
    if (!any) throw Error("synth: background " + to_hex(bg) + " has no foreground with enough contrast");
  }
}

namespace {

struct Placed {
  ViewClass cls;
  Rect dp;
};

class Generator {
 public:
  Generator(const SynthConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {}

  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double size() { return uniform_int(static_cast<int>(std::ceil(cfg_.min_size)), static_cast<int>(cfg_.max_size)); }
  double gap() {
    return uniform_int(static_cast<int>(std::ceil(cfg_.min_interval)), static_cast<int>(cfg_.max_interval));
  }
  ViewClass cls() {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    if (u < cfg_.button_share) return ViewClass::Button;
    if (u < cfg_.button_share + cfg_.text_share) return ViewClass::Text;
    return ViewClass::Image;
  }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng_)];
  }

  // Components relative to the container's content origin; empty when
  // nothing fits in max_height.
  std::vector<Rect> layout(LayoutPattern pattern, int k, double max_width, double max_height) {
    if (pattern == LayoutPattern::Grid) {
      std::vector<std::pair<int, int>> shapes;
      for (auto [r, c] : {std::pair{2, 2}, std::pair{2, 3}, std::pair{3, 2}}) {
        if (r * c >= cfg_.min_components && r * c <= cfg_.max_components) shapes.emplace_back(r, c);
      }
      if (!shapes.empty()) {
        const auto [rows, cols] = pick(shapes);
        double w = size(), h = size();
        const double gx = gap(), gy = gap();
        w = std::min(w, std::floor((max_width - (cols - 1) * gx) / cols));
        h = std::min(h, std::floor((max_height - (rows - 1) * gy) / rows));
        if (w >= cfg_.min_size && h >= cfg_.min_size) {
          std::vector<Rect> out;
          for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) out.push_back({c * (w + gx), r * (h + gy), w, h});
          return out;
        }
      }
      pattern = LayoutPattern::Row;
    }
    std::vector<Rect> out;
    double cursor = 0.0;
    for (int i = 0; i < k; ++i) {
      double w = size(), h = size();
      const double g = i == 0 ? 0.0 : gap();
      if (pattern == LayoutPattern::Row) {
        if (i == 0) w = std::min(w, max_width);
        if (h > max_height || cursor + g + w > max_width) break;
        out.push_back({cursor + g, 0.0, w, h});
        cursor += g + w;
      } else {
        if (i == 0) w = std::min(w, max_width);
        if (w > max_width || cursor + g + h > max_height) break;
        out.push_back({0.0, cursor + g, w, h});
        cursor += g + h;
      }
    }
    return out;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  const SynthConfig& cfg_;
  std::mt19937_64 rng_;
};

std::string class_name(ViewClass c) {
  switch (c) {
    case ViewClass::Button: return "android.widget.Button";
    case ViewClass::Text: return "android.widget.TextView";
    case ViewClass::Image: return "android.widget.ImageView";
    default: return "android.view.View";
  }
}

ViewNode make_node(std::string id, std::string cls, const Rect& dp, double density) {
  ViewNode n;
  n.id = std::move(id);
  n.class_name = std::move(cls);
  n.view_class = classify_class_name(n.class_name);
  set_bounds_dp(n, dp, density);
  return n;
}

}  // namespace

SyntheticGui gen_gui(const SynthConfig& cfg, std::uint64_t gui_seed, std::string name) {
  cfg.validate();
  Generator gen(cfg, gui_seed);
  SyntheticGui gui;
  gui.name = std::move(name);
  gui.seed = gui_seed;

  const double d = cfg.density;
  auto& screen = gui.tree.screen;
  screen.width_px = static_cast<int>(std::lround(cfg.screen_width_dp * d));
  screen.height_px = static_cast<int>(std::lround(cfg.screen_height_dp * d));
  screen.density = d;
  screen.background_color = gen.pick(cfg.backgrounds);

  std::vector<Rgb> palette;
  for (const auto& fg : cfg.foregrounds) {
    if (contrast_ratio(fg, screen.background_color) >= cfg.min_contrast) palette.push_back(fg);
  }

  gui.tree.root = make_node("root", "android.widget.FrameLayout", {0, 0, cfg.screen_width_dp, cfg.screen_height_dp}, d);

  const int n_containers = gen.uniform_int(cfg.min_containers, cfg.max_containers);
  const double pad = cfg.padding;
  const double inner_w = cfg.screen_width_dp - 2 * pad;
  double y = 0.0;
  int label = 0;
  for (int ci = 0; ci < n_containers; ++ci) {
    const double top = ci == 0 ? 0.0 : y + pad;
    const double max_h = cfg.screen_height_dp - top - 2 * pad;
    if (max_h < cfg.min_size) break;
    const auto pattern = gen.pick(cfg.patterns);
    const int k = gen.uniform_int(cfg.min_components, cfg.max_components);
    const auto rects = gen.layout(pattern, k, inner_w, max_h);
    if (rects.empty()) break;

    double content_h = 0.0;
    for (const auto& r : rects) content_h = std::max(content_h, r.bottom());
    const Rect cbox{0.0, top, cfg.screen_width_dp, content_h + 2 * pad};
    ViewNode container = make_node("container" + std::to_string(ci), "android.widget.LinearLayout", cbox, d);
    for (std::size_t i = 0; i < rects.size(); ++i) {
      const auto cls = gen.cls();
      const Rect r = rects[i].translated(pad, top + pad);
      ViewNode node = make_node("c" + std::to_string(ci) + "_" + std::to_string(i), class_name(cls), r, d);
      node.color = gen.pick(palette);
      if (cls == ViewClass::Text) node.text = "Label " + std::to_string(++label);
      else if (cls == ViewClass::Button) node.text = "Action " + std::to_string(++label);
      container.children.push_back(std::move(node));
    }
    gui.tree.root.children.push_back(std::move(container));
    y = cbox.bottom();
  }
  return gui;
}

std::vector<SyntheticGui> gen_accessible(const SynthConfig& cfg, std::size_t n) {
  std::vector<SyntheticGui> out;
  out.reserve(n);
  char name[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(name, sizeof name, "gui_%03zu", i);
    out.push_back(gen_gui(cfg, mix_seed(cfg.seed, i), name));
  }
  return out;
}

void InjectionMix::validate() const {
  for (double p : {p_size, p_interval, p_contrast}) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("injection probabilities must lie in [0, 1]");
  }
  if (!(min_shrunk > 0 && max_shrunk >= min_shrunk)) throw Error("bad shrink severity range");
  if (!(min_squeezed >= 0 && max_squeezed >= min_squeezed)) throw Error("bad squeeze severity range");
  if (!(min_washout > 0 && max_washout >= min_washout)) throw Error("bad washout severity range");
}

Injection inject_issues(const ViewTree& gui, const InjectionMix& mix, std::uint64_t seed, const Thresholds& th) {
  mix.validate();
  th.validate();
  if (mix.max_shrunk >= th.min_touch_dp) throw Error("shrink severity must stay below the touch-target threshold");
  if (mix.max_squeezed >= th.min_interval_dp) throw Error("squeeze severity must stay below the interval threshold");

  Injection out;
  out.tree = gui;
  const Wireframe wf = flatten(gui);
  const double d = gui.screen.density;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto px_between = [&](double lo_dp, double hi_dp) {
    const auto lo = static_cast<long>(std::ceil(lo_dp * d)), hi = static_cast<long>(std::floor(hi_dp * d));
    return static_cast<double>(std::uniform_int_distribution<long>(lo, std::max(lo, hi))(rng));
  };
  std::set<std::string> mutated;

  auto node_of = [&](const std::string& id) -> ViewNode& {
    ViewNode* n = find_node(out.tree.root, id);
    if (!n) throw Error("component '" + id + "' missing from the tree");
    return *n;
  };

  // Squeeze: move the later component of an adjacent pair toward the earlier.
  const auto pairs = adjacent_pairs(wf);
  if (mix.p_interval > 0.0 && pairs.empty() && !wf.components.empty()) {
    out.notes.push_back("interval injection skipped: no adjacent component pairs");
  }
  for (const auto& p : pairs) {
    if (!(unit(rng) < mix.p_interval)) continue;
    const auto& ca = wf.components[p.a];
    const auto& cb = wf.components[p.b];
    if (p.containment || mutated.count(ca.id) || mutated.count(cb.id)) {
      out.notes.push_back("interval injection skipped for " + ca.id + "/" + cb.id + ": component already mutated");
      continue;
    }
    const double target_px = px_between(mix.min_squeezed, mix.max_squeezed);
    const bool b_later = p.axis == Axis::X ? cb.bounds.x >= ca.bounds.x : cb.bounds.y >= ca.bounds.y;
    const auto& later = b_later ? cb : ca;
    ViewNode& node = node_of(later.id);
    const double gap_px = p.interval * d;
    const double move = gap_px - target_px;
    if (move <= 0.0) continue;
    Rect px = node.bounds_px;
    if (p.axis == Axis::X) px.x -= move;
    else px.y -= move;
    set_bounds_px(node, px, d);
    mutated.insert(ca.id);
    mutated.insert(cb.id);
  }

  // Shrink: centered, both dimensions capped at the drawn size.
  for (const auto& c : wf.components) {
    if (c.view_class != ViewClass::Button || mutated.count(c.id)) continue;
    if (!(unit(rng) < mix.p_size)) continue;
    ViewNode& node = node_of(c.id);
    const double s = px_between(mix.min_shrunk, mix.max_shrunk);
    const Rect& r = node.bounds_px;
    const double w = std::min(r.w, s), h = std::min(r.h, s);
    set_bounds_px(node, {r.x + std::floor((r.w - w) / 2.0), r.y + std::floor((r.h - h) / 2.0), w, h}, d);
    mutated.insert(c.id);
  }

  // Washout: recolor to just below the applicable threshold.
  for (const auto& c : wf.components) {
    if (!c.color || mutated.count(c.id)) continue;
    if (!(unit(rng) < mix.p_contrast)) continue;
    const double required = th.contrast_threshold(c.view_class, c.bounds.h);
    const double drop = mix.min_washout + (mix.max_washout - mix.min_washout) * unit(rng);
    const double target = std::max(1.0, required - drop);
    const auto res = recolor(*c.color, wf.background_color, target, RecolorMode::Luminance);
    if (!(res.achieved < required)) {
      out.notes.push_back("contrast injection skipped for " + c.id + ": could not get below threshold");
      continue;
    }
    node_of(c.id).color = res.color;
    mutated.insert(c.id);
  }

  for (auto& issue : detect_issues(flatten(out.tree), th)) {
    const bool ours = mutated.count(issue.component_id) || (issue.peer_id && mutated.count(*issue.peer_id));
    if (ours) out.issues.push_back(std::move(issue));
  }
  return out;
}

std::string manifest_to_json(const Manifest& m) {
  using ojson = nlohmann::ordered_json;
  ojson root;
  root["seed"] = m.seed;
  root["injected"] = m.injected;
  ojson guis = ojson::array();
  for (const auto& e : m.entries) {
    ojson j;
    j["file"] = e.file;
    j["seed"] = e.seed;
    j["issues"] = ojson::parse(issues_to_json(e.injected));
    j["notes"] = e.notes;
    guis.push_back(std::move(j));
  }
  root["guis"] = std::move(guis);
  return root.dump(2) + "\n";
}

Manifest manifest_from_json(std::string_view text) {
  using ojson = nlohmann::ordered_json;
  Manifest m;
  try {
    const auto root = ojson::parse(text);
    m.seed = root.at("seed").get<std::uint64_t>();
    m.injected = root.value("injected", false);
    for (const auto& j : root.at("guis")) {
      ManifestEntry e;
      e.file = j.at("file").get<std::string>();
      e.seed = j.at("seed").get<std::uint64_t>();
      e.injected = issues_from_json(j.at("issues").dump());
      e.notes = j.value("notes", std::vector<std::string>{});
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

}  // namespace guifix
