#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "guifix/calibrate.hpp"
#include "guifix/detect.hpp"
#include "guifix/fix.hpp"
#include "guifix/rgcn.hpp"
#include "guifix/spectral.hpp"
#include "guifix/synth.hpp"

namespace guifix {

/// Every tunable of the toolkit.  Loaded from an INI-style file with the
/// sections [thresholds] [train] [spectral] [predict] [fix] [calibrate]
/// [synth] [inject]; unknown sections or keys are rejected.
struct Settings {
  Thresholds thresholds;
  TrainConfig train;
  SpectralConfig spectral;
  PredictOptions predict;
  FixOptions fix;  // spectral/predict/seed members are filled from the above
  std::size_t calibrate_removed_edges = 3;
  std::size_t calibrate_degree = 2;
  SynthConfig synth;
  InjectionMix inject;

  void validate() const;

  /// Fix options with the shared spectral and prediction settings, the
  /// prediction learning rate derived from the model (training rate / 10)
  /// and the given seed.
  FixOptions fix_options(const TrainedModel& model, std::uint64_t seed) const;
  MappingProtocol mapping_protocol(const TrainedModel& model, std::uint64_t seed) const;
};

Settings parse_settings(std::string_view text);
Settings load_settings(const std::filesystem::path& path);

/// All effective values in the same INI format, for echoing into outputs.
std::string settings_to_ini(const Settings& s);

}  // namespace guifix
