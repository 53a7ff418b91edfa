#include "guifix/detect.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "guifix/error.hpp"
#include "guifix/graph.hpp"

namespace guifix {

void Thresholds::validate() const {
  for (double v : {min_touch_dp, min_interval_dp, min_text_contrast, min_large_text_contrast,
                   large_text_dp, min_nontext_contrast}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error("thresholds must be positive and finite");
  }
  if (min_text_contrast < 1.0 || min_large_text_contrast < 1.0 || min_nontext_contrast < 1.0) {
    throw Error("contrast thresholds must be >= 1");
  }
  if (min_large_text_contrast > min_text_contrast) {
    throw Error("large-text contrast threshold exceeds the normal-text threshold");
  }
}

double Thresholds::contrast_threshold(ViewClass cls, double height_dp) const {
  if (cls != ViewClass::Text) return min_nontext_contrast;
  return height_dp >= large_text_dp - kGeometryTolerance ? min_large_text_contrast : min_text_contrast;
}

std::string_view to_string(IssueKind k) {
  switch (k) {
    case IssueKind::SmallSize: return "SmallSize";
    case IssueKind::NarrowInterval: return "NarrowInterval";
    case IssueKind::LowContrast: return "LowContrast";
  }
  return "SmallSize";
}

IssueKind issue_kind_from_string(std::string_view s) {
  if (s == "SmallSize") return IssueKind::SmallSize;
  if (s == "NarrowInterval") return IssueKind::NarrowInterval;
  if (s == "LowContrast") return IssueKind::LowContrast;
  throw ParseError("unknown issue kind '" + std::string(s) + "'");
}

bool issue_identity_less(const Issue& a, const Issue& b) { return a.key() < b.key(); }

double relative_luminance(Rgb c) {
  if (!c.valid()) throw Error("color channel out of range");
  auto lin = [](int v) {
    const double s = v / 255.0;
    return s <= 0.03928 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
  };
  return 0.2126 * lin(c.r) + 0.7152 * lin(c.g) + 0.0722 * lin(c.b);
}

double contrast_ratio(Rgb a, Rgb b) {
  const double la = relative_luminance(a), lb = relative_luminance(b);
  return (std::max(la, lb) + 0.05) / (std::min(la, lb) + 0.05);
}

DetectionResult detect(const Wireframe& wf, const Thresholds& th) {
  DetectionResult out;
  const auto pairs = adjacent_pairs(wf);
  std::set<std::size_t> has_peer;
  for (const auto& p : pairs) {
    has_peer.insert(p.a);
    has_peer.insert(p.b);
  }

  for (std::size_t i = 0; i < wf.components.size(); ++i) {
    const auto& c = wf.components[i];
    const bool interactive =
        c.view_class == ViewClass::Button || (c.view_class == ViewClass::Image && has_peer.count(i));
    const double size = std::min(c.bounds.w, c.bounds.h);
    if (interactive && size < th.min_touch_dp - kGeometryTolerance) {
      out.issues.push_back({c.id, IssueKind::SmallSize, size, th.min_touch_dp, std::nullopt});
    }
    if (!c.color) {
      out.unscanned.push_back(c.id);
      continue;
    }
    const double required = th.contrast_threshold(c.view_class, c.bounds.h);
    const double cr = contrast_ratio(*c.color, wf.background_color);
    if (cr < required) out.issues.push_back({c.id, IssueKind::LowContrast, cr, required, std::nullopt});
  }

  for (const auto& p : pairs) {
    // Containment records a positional relation, not a spacing problem.
    if (p.containment) continue;
    if (p.interval < th.min_interval_dp - kGeometryTolerance) {
      out.issues.push_back({wf.components[p.a].id, IssueKind::NarrowInterval, p.interval,
                            th.min_interval_dp, wf.components[p.b].id});
    }
  }
  std::sort(out.issues.begin(), out.issues.end(), issue_identity_less);
  return out;
}

std::vector<Issue> detect_issues(const Wireframe& wf, const Thresholds& th) { return detect(wf, th).issues; }

std::string issues_to_json(const std::vector<Issue>& issues) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& i : issues) {
    nlohmann::ordered_json j;
    j["component_id"] = i.component_id;
    j["kind"] = to_string(i.kind);
    j["measured"] = i.measured;
    j["threshold"] = i.threshold;
    j["peer_id"] = i.peer_id ? nlohmann::ordered_json(*i.peer_id) : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

std::vector<Issue> issues_from_json(std::string_view text) {
  std::vector<Issue> out;
  try {
    const auto arr = nlohmann::json::parse(text);
    for (const auto& j : arr) {
      Issue i;
      i.component_id = j.at("component_id").get<std::string>();
      i.kind = issue_kind_from_string(j.at("kind").get<std::string>());
      i.measured = j.at("measured").get<double>();
      i.threshold = j.at("threshold").get<double>();
      if (j.contains("peer_id") && !j["peer_id"].is_null()) i.peer_id = j["peer_id"].get<std::string>();
      out.push_back(std::move(i));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed issue list: ") + e.what());
  }
  return out;
}

std::string issues_to_table(const std::vector<Issue>& issues) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-24s %-15s %10s %10s  %s\n", "component", "kind", "measured", "threshold",
                "peer");
  os << buf;
  for (const auto& i : issues) {
    std::snprintf(buf, sizeof buf, "%-24s %-15s %10.3f %10.3f  %s\n", i.component_id.c_str(),
                  std::string(to_string(i.kind)).c_str(), i.measured, i.threshold,
                  i.peer_id ? i.peer_id->c_str() : "-");
    os << buf;
  }
  return os.str();
}

}  // namespace guifix
