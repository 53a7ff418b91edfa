#pragma once

#include <complex>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "guifix/rgcn.hpp"

namespace guifix {

/// Node signal scalar: Euclidean norm of the embedding.
double project(std::span<const double> embedding);

/// c_k = (1/N) sum_n f(n) exp(-i 2 pi k n / N) for k = 0..N-1.
/// Radix-2 FFT for powers of two, Bluestein's chirp transform otherwise.
std::vector<std::complex<double>> dft(std::span<const double> series);

struct SpectralConfig {
  double tolerance = 1e-4;
  std::size_t window = 10;
  std::size_t coefficient_index = 0;

  void validate() const;
};

/// One node's samples, f(n) for iterations n0, n0+1, ...
struct SignalTrace {
  int node = 0;
  std::string node_id;
  int start_iteration = 0;
  std::vector<double> samples;
};

struct StableSignal {
  std::string node_id;
  double value = 0.0;  // |c_k| over the analysis window
  int converged_at = 0;  // iteration that closes the analysis window
  bool converged = false;
};

/// With samples indexed from 0, converged_at is the first t >= window such
/// that every relative step |f(s) - f(s-1)| / max(|f(s)|, 1e-9) for s in
/// (t - window, t] is below the tolerance (reported as start_iteration + t).
/// The value is |c_k| of the DFT over the samples (t - window, t], or over
/// the final window when the trace never settles.  Throws when the trace
/// has fewer than `window` samples.
StableSignal stable_signal(const SignalTrace& trace, const SpectralConfig& cfg);

/// Prediction observer that records projected embeddings and reports
/// convergence once every watched node has settled.
class SignalRecorder : public IterationObserver {
 public:
  /// `node_ids` maps graph index to id; `watched` empty means all nodes.
  SignalRecorder(std::vector<std::string> node_ids, SpectralConfig cfg, std::vector<int> watched = {});

  void on_embedding(int node, int iteration, std::span<const double> embedding) override;
  bool all_converged() const override;

  const SignalTrace& trace(int node) const { return traces_.at(static_cast<std::size_t>(node)); }
  const std::vector<SignalTrace>& traces() const { return traces_; }
  StableSignal signal(int node) const { return stable_signal(trace(node), cfg_); }

  /// node_id,iteration,sample rows.
  std::string to_csv() const;

 private:
  bool settled(const SignalTrace& t) const;

  SpectralConfig cfg_;
  std::vector<SignalTrace> traces_;
  std::vector<int> watched_;
};

}  // namespace guifix
