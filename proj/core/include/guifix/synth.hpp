#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "guifix/detect.hpp"
#include "guifix/layout.hpp"

namespace guifix {

enum class LayoutPattern { Row, Column, Grid };

std::string_view to_string(LayoutPattern p);
LayoutPattern layout_pattern_from_string(std::string_view s);

/// Parameters of the synthetic GUI generator.  All sizes in dp.
struct SynthConfig {
  std::uint64_t seed = 1;
  double screen_width_dp = 360.0;
  double screen_height_dp = 640.0;
  double density = 2.0;
  int min_containers = 1;
  int max_containers = 5;
  int min_components = 1;  // per container
  int max_components = 6;
  std::vector<LayoutPattern> patterns{LayoutPattern::Row, LayoutPattern::Column, LayoutPattern::Grid};
  double min_size = 48.0;
  double max_size = 120.0;
  double min_interval = 8.0;
  double max_interval = 32.0;
  double padding = 8.0;  // inside containers and between them
  double button_share = 0.45;
  double text_share = 0.40;  // the rest are images
  std::vector<Rgb> backgrounds{{255, 255, 255}, {250, 250, 250}, {245, 245, 220}, {33, 33, 33}, {18, 18, 18}};
  std::vector<Rgb> foregrounds{{0, 0, 0},       {33, 33, 33},    {25, 118, 210}, {211, 47, 47},
                               {56, 142, 60},   {255, 255, 255}, {255, 235, 59}, {129, 212, 250},
                               {97, 97, 97},    {123, 31, 162}};
  double min_contrast = 4.6;  // foreground/background pairs below this are never drawn
  Thresholds thresholds;

  /// Throws unless the ranges keep generated GUIs clean under `thresholds`.
  void validate() const;
};

struct SyntheticGui {
  std::string name;
  std::uint64_t seed = 0;
  ViewTree tree;
};

/// One GUI: containers stacked top to bottom at full width, each holding a
/// row, column or uniform grid of components.  Counts are drawn from the
/// configured ranges, then truncated once the screen runs out of room, so
/// late containers may hold fewer components than the minimum (or be
/// dropped).  Deterministic per seed.
SyntheticGui gen_gui(const SynthConfig& cfg, std::uint64_t gui_seed, std::string name);

/// n detector-clean GUIs named gui_000, gui_001, ...
std::vector<SyntheticGui> gen_accessible(const SynthConfig& cfg, std::size_t n);

/// Per-candidate injection probabilities and severities.
struct InjectionMix {
  double p_size = 0.15;      // per button
  double p_interval = 0.15;  // per adjacent pair
  double p_contrast = 0.15;  // per colored component
  double min_shrunk = 24.0;  // dp
  double max_shrunk = 44.0;
  double min_squeezed = 2.0;  // dp
  double max_squeezed = 6.0;
  double min_washout = 0.3;  // contrast below the applicable threshold
  double max_washout = 1.5;

  void validate() const;
};

struct Injection {
  ViewTree tree;
  std::vector<Issue> issues;       // detector output restricted to mutated components
  std::vector<std::string> notes;  // skipped injections
};

/// Mutates a clean GUI: centered shrinking of buttons, squeezing the later
/// component of an adjacent pair toward the earlier one, and washing out
/// colors to just below the contrast threshold.  Each component takes part
/// in at most one mutation.
Injection inject_issues(const ViewTree& gui, const InjectionMix& mix, std::uint64_t seed, const Thresholds& th);

struct ManifestEntry {
  std::string file;
  std::uint64_t seed = 0;
  std::vector<Issue> injected;
  std::vector<std::string> notes;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::uint64_t seed = 0;
  bool injected = false;
  std::vector<ManifestEntry> entries;

  bool operator==(const Manifest&) const = default;
};

std::string manifest_to_json(const Manifest& m);
Manifest manifest_from_json(std::string_view text);

}  // namespace guifix
