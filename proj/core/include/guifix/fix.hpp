#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guifix/calibrate.hpp"
#include "guifix/detect.hpp"
#include "guifix/layout.hpp"
#include "guifix/rgcn.hpp"
#include "guifix/spectral.hpp"
#include "guifix/wireframe.hpp"

namespace guifix {

// --- Targets -------------------------------------------------------------

/// A curve evaluation followed by clamping.
struct Target {
  double value = 0.0;  // after clamps
  double raw = 0.0;    // curve output
  std::vector<std::string> clamps;
};

/// max(f_size(alpha), min_touch_dp).  Geometric capping happens in plan_fix.
Target target_size(const StableSignal& sig, const Calibration& cal, const Thresholds& th);

/// max(f_interval(|alpha_a - alpha_b|), min_interval_dp).
Target target_interval(const StableSignal& a, const StableSignal& b, const Calibration& cal, const Thresholds& th);

/// Mean of f_interval over consecutive pairs of an ordered run of at least
/// three components, clamped to min_interval_dp.
Target mean_interval(std::span<const StableSignal> ordered, const Calibration& cal, const Thresholds& th);

/// max(f_color(alpha), applicable threshold), capped at 21.
Target target_contrast(const StableSignal& sig, const Calibration& cal, const Thresholds& th, bool is_text,
                       double text_height_dp);

// --- Recoloring ----------------------------------------------------------

enum class RecolorMode { Luminance, PerChannel };

std::string_view to_string(RecolorMode m);
RecolorMode recolor_mode_from_string(std::string_view s);

struct RecolorResult {
  Rgb color;
  bool feasible = true;
  double achieved = 1.0;        // contrast of `color` against the background
  double max_achievable = 21.0;  // best of black and white against the background
  bool out_of_gamut = false;     // per-channel channels had to be clamped
};

/// Best contrast any color can reach against `bg` (black or white).
double max_contrast_against(Rgb bg);

/// Luminance mode aims at target luminance (L_bg + 0.05)/cr - 0.05 (darker)
/// or cr (L_bg + 0.05) - 0.05 (lighter), preferring the component's current
/// side, and scales the linear color to hit it (blending toward white when
/// scaling alone would leave the gamut).  The rounded result always reaches
/// at least cr.  Per-channel mode sets each linear channel to
/// (L_bg + 0.05) / (cr * k) with k = 0.2126, 0.7125, 0.0722 and clamps.
/// The background is never changed.  Throws unless 1 <= cr <= 21.
RecolorResult recolor(Rgb fg, Rgb bg, double cr, RecolorMode mode = RecolorMode::Luminance);

// --- Patches -------------------------------------------------------------

struct ChangeNote {
  std::string reason;  // issue kind, or "co-adjust"
  double signal = 0.0;
  std::string curve;
  double raw = 0.0;
  double target = 0.0;
  std::vector<std::string> clamps;

  bool operator==(const ChangeNote&) const = default;
};

enum class ChangeField { Bounds, Color };

struct Change {
  std::string component_id;
  ChangeField field = ChangeField::Bounds;
  Rect old_bounds_px, new_bounds_px;
  Rect old_bounds, new_bounds;  // dp
  Rgb old_color, new_color;
  bool minor = false;  // co-adjustment only
  std::vector<ChangeNote> notes;

  bool operator==(const Change&) const = default;
};

struct UnfixableEntry {
  std::string component_id;
  IssueKind kind = IssueKind::SmallSize;
  std::optional<std::string> peer_id;
  std::string reason;

  bool operator==(const UnfixableEntry&) const = default;
};

/// At most one bounds and one color change per component.
struct Patch {
  std::vector<Change> changes;
  std::vector<UnfixableEntry> unfixable;
  bool partial = false;  // validation did not converge; offending work reverted
  std::vector<std::string> warnings;

  bool empty() const { return changes.empty(); }
  bool operator==(const Patch&) const = default;
};

std::string patch_to_json(const Patch& p);
Patch patch_from_json(std::string_view text);

/// Replaces bounds and colors of the referenced nodes; everything else is
/// left untouched.  Throws on a dangling component id.
ViewTree apply_patch(const ViewTree& tree, const Patch& p);

// --- Planning ------------------------------------------------------------

struct FixOptions {
  RecolorMode recolor_mode = RecolorMode::Luminance;
  SpectralConfig spectral;
  PredictOptions predict;
  std::uint64_t seed = 0;
  int validation_rounds = 5;
  double co_adjust_trigger = 0.01;  // relative signal shift
  double co_adjust_cap = 0.05;      // relative attribute change
};

struct FixPlan {
  Patch patch;
  std::vector<StableSignal> signals;  // per wireframe component
  int prediction_iterations = 0;
  bool prediction_converged = false;
  int validation_rounds_used = 0;
};

/// Locates the problem components, removes their edges, runs the
/// prediction loop with a signal recorder, turns stable signals into
/// targets, and validates the result by re-detection on the patched tree
/// (built from `wf` when `tree` is null).  Issues that were absent before
/// the fix trigger clamping and, failing that, reverting of the offending
/// components.
FixPlan plan_fix(const Wireframe& wf, std::span<const Issue> issues, const TrainedModel& model,
                 const Calibration& cal, const Thresholds& th, const FixOptions& opts,
                 const ViewTree* tree = nullptr);

}  // namespace guifix
