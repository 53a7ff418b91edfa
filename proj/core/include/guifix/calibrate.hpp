#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "guifix/detect.hpp"
#include "guifix/error.hpp"
#include "guifix/rgcn.hpp"
#include "guifix/spectral.hpp"
#include "guifix/wireframe.hpp"

namespace guifix {

/// (attribute, signal) observations.  Interval pairs carry the absolute
/// signal gap of the two components.
struct MappingPair {
  double attribute = 0.0;
  double signal = 0.0;
  bool operator==(const MappingPair&) const = default;
};

struct MappingSet {
  std::vector<MappingPair> size_pairs;      // (size dp, D1)
  std::vector<MappingPair> interval_pairs;  // (interval dp, |D1 - D2|)
  std::vector<MappingPair> contrast_pairs;  // (contrast ratio, D1)
  bool operator==(const MappingSet&) const = default;
};

/// y = sum_k coefficients[k] x^k.
struct PolyFit {
  std::vector<double> coefficients;  // ascending powers
  double residual_rms = 0.0;
  std::size_t samples = 0;

  double operator()(double x) const;
  double a(std::size_t power) const { return power < coefficients.size() ? coefficients[power] : 0.0; }
  bool operator==(const PolyFit&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Least squares via Householder QR on the column-scaled Vandermonde
/// matrix.  Throws when fewer than degree+1 distinct x values exist.
PolyFit fit_poly(std::span<const Point> points, std::size_t degree = 2);

enum class Provenance { Fitted, Published };

std::string_view to_string(Provenance p);

/// Curves map a stable signal to an attribute target, in raw units (dp for
/// size and interval, contrast ratio for color).
struct Calibration {
  PolyFit f_size;
  PolyFit f_interval;
  PolyFit f_color;
  Provenance provenance = Provenance::Fitted;

  double size(double alpha) const { return f_size(alpha); }
  double interval(double alpha_a, double alpha_b) const;
  double color(double alpha) const { return f_color(alpha); }
  bool operator==(const Calibration&) const = default;
};

/// The published curves:
///   size(a)      = 0.045 a^2 + 1.742 a - 0.0256
///   interval(d)  = 0.042 d^2 + 1.634 d - 0.0378,  d = |a1 - a2|
///   color(a)     = 1.328 a^2 - 0.7723 a - 1.8954
Calibration published_calibration();

/// Raised when a calibration corpus is not detector-clean.
class CorpusError : public Error {
 public:
  CorpusError(std::string message, std::vector<std::pair<std::string, Issue>> issues)
      : Error(std::move(message)), issues_(std::move(issues)) {}
  /// (gui name, issue) pairs.
  const std::vector<std::pair<std::string, Issue>>& issues() const { return issues_; }

 private:
  std::vector<std::pair<std::string, Issue>> issues_;
};

struct MappingProtocol {
  std::size_t removed_edges = 3;
  std::uint64_t seed = 0;
  SpectralConfig spectral;
  PredictOptions predict;
};

struct NamedWireframe {
  std::string name;
  Wireframe wireframe;
};

/// Signals of every component of one GUI after removing random edges and
/// running the prediction loop; indexed like wf.components.
std::vector<StableSignal> capture_signals(const TrainedModel& model, const Wireframe& wf,
                                          const MappingProtocol& protocol, std::uint64_t gui_seed);

/// One size pair per component, one interval pair per adjacent
/// (non-containing, positive-gap) component pair and one contrast pair per
/// colored component.  Throws CorpusError if any GUI has detected issues.
MappingSet build_mapping_set(const TrainedModel& model, std::span<const NamedWireframe> corpus,
                             const MappingProtocol& protocol, const Thresholds& th);

/// Fits the three curves with x = signal and y = attribute.
Calibration fit_calibration(const MappingSet& set, std::size_t degree = 2);

/// "guifix-calibration 1" header, provenance and units lines, then one
/// "curve <name> <count> <a0> <a1> ... rms <r> samples <n>" line per curve
/// (coefficients in ascending powers).
std::string serialize_calibration(const Calibration& c);
Calibration parse_calibration(std::string_view text);
void save_calibration(const Calibration& c, const std::filesystem::path& path);
Calibration load_calibration(const std::filesystem::path& path);

/// Long-form CSV of a mapping set: kind,attribute,signal.
std::string mapping_set_csv(const MappingSet& set);

}  // namespace guifix
