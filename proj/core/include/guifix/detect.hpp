#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "guifix/geometry.hpp"
#include "guifix/wireframe.hpp"

namespace guifix {

/// Geometric comparisons (size, interval, text height) ignore differences
/// below this many dp, which only arise from px/dp rounding.
inline constexpr double kGeometryTolerance = 1e-9;

/// Detector thresholds, all in dp or contrast-ratio units.
struct Thresholds {
  double min_touch_dp = 48.0;
  double min_interval_dp = 8.0;
  double min_text_contrast = 4.5;
  double min_large_text_contrast = 3.0;
  double large_text_dp = 18.0;
  double min_nontext_contrast = 3.0;

  /// Throws Error unless every value is positive, every contrast threshold
  /// is >= 1 and the large-text threshold does not exceed the normal one.
  void validate() const;
  /// Contrast threshold for a component of the given class and height.
  double contrast_threshold(ViewClass cls, double height_dp) const;
};

enum class IssueKind { SmallSize, NarrowInterval, LowContrast };

std::string_view to_string(IssueKind k);
IssueKind issue_kind_from_string(std::string_view s);

struct Issue {
  std::string component_id;
  IssueKind kind = IssueKind::SmallSize;
  double measured = 0.0;
  double threshold = 0.0;
  std::optional<std::string> peer_id;  // NarrowInterval only

  /// Identity used for set comparisons: (component, kind, peer).
  auto key() const { return std::tie(component_id, kind, peer_id); }
  bool same_identity(const Issue& o) const { return key() == o.key(); }
  bool operator==(const Issue&) const = default;
};

bool issue_identity_less(const Issue& a, const Issue& b);

/// W3C relative luminance in [0, 1].  Throws on channels outside [0, 255].
double relative_luminance(Rgb c);

/// (L_lighter + 0.05) / (L_darker + 0.05), always >= 1.
double contrast_ratio(Rgb a, Rgb b);

struct DetectionResult {
  std::vector<Issue> issues;
  std::vector<std::string> unscanned;  // components without color
};

/// Rule-based detection of small touch targets, narrow intervals between
/// adjacent components and low contrast against the background.  Output is
/// sorted by issue identity.
DetectionResult detect(const Wireframe& wf, const Thresholds& th);
std::vector<Issue> detect_issues(const Wireframe& wf, const Thresholds& th);

/// One JSON object per issue, as a JSON array.
std::string issues_to_json(const std::vector<Issue>& issues);
std::vector<Issue> issues_from_json(std::string_view text);
std::string issues_to_table(const std::vector<Issue>& issues);

}  // namespace guifix
