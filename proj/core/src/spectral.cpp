#include "guifix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "guifix/error.hpp"
#include "guifix/io.hpp"

namespace guifix {

namespace {

using cd = std::complex<double>;

bool is_pow2(std::size_t n) { return n && (n & (n - 1)) == 0; }

// In-place iterative radix-2 transform with kernel exp(sign * i 2 pi k n / N).
void fft_pow2(std::vector<cd>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Twiddles are computed directly rather than by repeated
        // multiplication to keep round-off at the 1e-15 level.
        const cd w = std::polar(1.0, ang * static_cast<double>(k));
        const cd u = a[i + k];
        const cd v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

// Bluestein: express the length-n DFT as a convolution with a chirp and
// evaluate it with power-of-two FFTs.
std::vector<cd> bluestein(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  std::vector<cd> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n avoids precision loss in the angle for long series.
    const auto k2 = static_cast<double>((k * k) % (2 * n));
    chirp[k] = std::polar(1.0, -std::numbers::pi * k2 / static_cast<double>(n));
  }
  std::vector<cd> a(m), b(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

  fft_pow2(a, -1);
  fft_pow2(b, -1);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_pow2(a, +1);

  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] / static_cast<double>(m) * chirp[k];
  return out;
}

}  // namespace

double project(std::span<const double> embedding) {
  double ss = 0.0;
  for (double v : embedding) ss += v * v;
  return std::sqrt(ss);
}

std::vector<std::complex<double>> dft(std::span<const double> series) {
  if (series.empty()) throw Error("dft of an empty series");
  const std::size_t n = series.size();
  std::vector<cd> x(series.begin(), series.end());
  std::vector<cd> c;
  if (is_pow2(n)) {
    fft_pow2(x, -1);
    c = std::move(x);
  } else {
    c = bluestein(x);
  }
  for (auto& v : c) v /= static_cast<double>(n);
  return c;
}

void SpectralConfig::validate() const {
  if (window < 4) throw Error("spectral window must be at least 4 samples");
  if (!(tolerance > 0.0)) throw Error("spectral tolerance must be positive");
  if (coefficient_index >= window) throw Error("coefficient index must be below the window length");
}

StableSignal stable_signal(const SignalTrace& trace, const SpectralConfig& cfg) {
  cfg.validate();
  const auto& f = trace.samples;
  const std::size_t w = cfg.window;
  if (f.size() < w) {
    throw Error("trace of node " + trace.node_id + " has " + std::to_string(f.size()) + " samples, window needs " +
                std::to_string(w));
  }
  StableSignal out;
  out.node_id = trace.node_id;

  std::size_t end = f.size() - 1;  // last sample of the analysis window
  std::size_t run = 0;              // consecutive settled steps ending at s
  for (std::size_t s = 1; s < f.size(); ++s) {
    const double rel = std::abs(f[s] - f[s - 1]) / std::max(std::abs(f[s]), 1e-9);
    run = rel < cfg.tolerance ? run + 1 : 0;
    if (run >= w) {
      end = s;
      out.converged = true;
      break;
    }
  }
  const auto coeffs = dft(std::span<const double>(f).subspan(end + 1 - w, w));
  out.value = std::abs(coeffs[cfg.coefficient_index]);
  out.converged_at = trace.start_iteration + static_cast<int>(end);
  return out;
}

SignalRecorder::SignalRecorder(std::vector<std::string> node_ids, SpectralConfig cfg, std::vector<int> watched)
    : cfg_(cfg), watched_(std::move(watched)) {
  cfg_.validate();
  traces_.resize(node_ids.size());
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    traces_[i].node = static_cast<int>(i);
    traces_[i].node_id = std::move(node_ids[i]);
  }
  for (int n : watched_) {
    if (n < 0 || static_cast<std::size_t>(n) >= traces_.size()) throw Error("watched node index out of range");
  }
}

void SignalRecorder::on_embedding(int node, int iteration, std::span<const double> embedding) {
  if (node < 0 || static_cast<std::size_t>(node) >= traces_.size()) throw Error("embedding for unknown node");
  auto& t = traces_[static_cast<std::size_t>(node)];
  if (t.samples.empty()) t.start_iteration = iteration;
  t.samples.push_back(project(embedding));
}

bool SignalRecorder::settled(const SignalTrace& t) const {
  const auto& f = t.samples;
  if (f.size() < cfg_.window + 1) return false;
  for (std::size_t s = f.size() - cfg_.window; s < f.size(); ++s) {
    if (!(std::abs(f[s] - f[s - 1]) / std::max(std::abs(f[s]), 1e-9) < cfg_.tolerance)) return false;
  }
  return true;
}

bool SignalRecorder::all_converged() const {
  if (watched_.empty()) {
    return std::all_of(traces_.begin(), traces_.end(), [&](const SignalTrace& t) { return settled(t); });
  }
  return std::all_of(watched_.begin(), watched_.end(),
                     [&](int n) { return settled(traces_[static_cast<std::size_t>(n)]); });
}

std::string SignalRecorder::to_csv() const {
  std::ostringstream out;
  out << "node_id,iteration,sample\n";
  for (const auto& t : traces_) {
    for (std::size_t k = 0; k < t.samples.size(); ++k) {
      out << t.node_id << ',' << t.start_iteration + static_cast<int>(k) << ',' << format_double(t.samples[k]) << '\n';
    }
  }
  return out.str();
}

}  // namespace guifix
