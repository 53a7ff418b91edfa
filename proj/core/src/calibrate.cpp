#include "guifix/calibrate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "guifix/error.hpp"
#include "guifix/graph.hpp"
#include "guifix/io.hpp"
#include "guifix/random.hpp"

namespace guifix {

double PolyFit::operator()(double x) const {
  double y = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) y = y * x + *it;
  return y;
}

PolyFit fit_poly(std::span<const Point> points, std::size_t degree) {
  const std::size_t p = degree + 1;
  const std::size_t n = points.size();
  std::set<double> distinct;
  for (const auto& pt : points) {
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) throw Error("non-finite point in polynomial fit");
    distinct.insert(pt.x);
  }
  if (n < p) throw Error("polynomial fit needs at least " + std::to_string(p) + " points, got " + std::to_string(n));
  if (distinct.size() < p) throw Error("rank-deficient design: fewer than " + std::to_string(p) + " distinct x values");

  // Vandermonde with each column scaled to unit max magnitude.
  Matrix a(n, p);
  std::vector<double> scale(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 1.0;
    for (std::size_t k = 0; k < p; ++k) {
      a(i, k) = v;
      scale[k] = std::max(scale[k], std::abs(v));
      v *= points[i].x;
    }
  }
  for (std::size_t k = 0; k < p; ++k) {
    if (scale[k] == 0.0) throw Error("rank-deficient design: zero column");
    for (std::size_t i = 0; i < n; ++i) a(i, k) /= scale[k];
  }
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = points[i].y;

  // Householder QR, applying the reflections to b as we go.
  std::vector<double> rdiag(p);
  for (std::size_t k = 0; k < p; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (norm < 1e-14) throw Error("rank-deficient design matrix");
    const double alpha = a(k, k) > 0.0 ? -norm : norm;
    std::vector<double> v(n - k);
    for (std::size_t i = k; i < n; ++i) v[i - k] = a(i, k);
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (double x : v) vnorm2 += x * x;
    if (vnorm2 > 0.0) {
      for (std::size_t j = k; j < p; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < n; ++i) dot += v[i - k] * a(i, j);
        const double f = 2.0 * dot / vnorm2;
        for (std::size_t i = k; i < n; ++i) a(i, j) -= f * v[i - k];
      }
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i - k] * b[i];
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < n; ++i) b[i] -= f * v[i - k];
    }
    rdiag[k] = a(k, k);
  }
  double max_diag = 0.0;
  for (double d : rdiag) max_diag = std::max(max_diag, std::abs(d));
  for (double d : rdiag) {
    if (std::abs(d) < 1e-12 * max_diag) throw Error("rank-deficient design matrix");
  }

  std::vector<double> coef(p);
  for (std::size_t k = p; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < p; ++j) s -= a(k, j) * coef[j];
    coef[k] = s / a(k, k);
  }
  for (std::size_t k = 0; k < p; ++k) coef[k] /= scale[k];

  PolyFit fit;
  fit.coefficients = std::move(coef);
  fit.samples = n;
  double ss = 0.0;
  for (const auto& pt : points) {
    const double r = pt.y - fit(pt.x);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

std::string_view to_string(Provenance p) { return p == Provenance::Fitted ? "fitted" : "published"; }

double Calibration::interval(double alpha_a, double alpha_b) const { return f_interval(std::abs(alpha_a - alpha_b)); }

Calibration published_calibration() {
  Calibration c;
  c.f_size.coefficients = {-0.0256, 1.742, 0.045};
  c.f_interval.coefficients = {-0.0378, 1.634, 0.042};
  c.f_color.coefficients = {-1.8954, -0.7723, 1.328};
  c.provenance = Provenance::Published;
  return c;
}

std::vector<StableSignal> capture_signals(const TrainedModel& model, const Wireframe& wf,
                                          const MappingProtocol& protocol, std::uint64_t gui_seed) {
  const GuiGraph g = build_graph(wf);
  const auto removal = remove_random_edges(g, std::min(protocol.removed_edges, g.edges.size()), gui_seed);

  std::vector<std::string> ids;
  for (const auto& n : g.nodes) ids.push_back(n.id);
  std::vector<int> watched;
  for (std::size_t i = 0; i < g.component_count(); ++i) watched.push_back(static_cast<int>(i));
  SignalRecorder recorder(ids, protocol.spectral, watched);

  PredictOptions opts = protocol.predict;
  opts.seed = mix_seed(gui_seed, 0x51);
  predict_links(model, removal.graph, removal.removed, recorder, opts);

  std::vector<StableSignal> out;
  for (std::size_t i = 0; i < g.component_count(); ++i) out.push_back(recorder.signal(static_cast<int>(i)));
  return out;
}

MappingSet build_mapping_set(const TrainedModel& model, std::span<const NamedWireframe> corpus,
                             const MappingProtocol& protocol, const Thresholds& th) {
  if (corpus.empty()) throw Error("calibration corpus is empty");
  std::vector<std::pair<std::string, Issue>> dirty;
  for (const auto& item : corpus) {
    for (auto& issue : detect_issues(item.wireframe, th)) dirty.emplace_back(item.name, std::move(issue));
  }
  if (!dirty.empty()) {
    throw CorpusError("calibration corpus is not clean: " + std::to_string(dirty.size()) + " issue(s) detected",
                      std::move(dirty));
  }

  MappingSet set;
  for (std::size_t gi = 0; gi < corpus.size(); ++gi) {
    const Wireframe& wf = corpus[gi].wireframe;
    if (wf.components.empty()) continue;
    const auto signals = capture_signals(model, wf, protocol, mix_seed(protocol.seed, gi));
    const GuiGraph g = build_graph(wf);
    for (std::size_t i = 0; i < wf.components.size(); ++i) {
      const auto& attr = g.nodes[i].attributes;
      set.size_pairs.push_back({attr.size, signals[i].value});
      if (wf.components[i].color) set.contrast_pairs.push_back({attr.contrast, signals[i].value});
    }
    for (const auto& pair : adjacent_pairs(wf)) {
      if (pair.containment || !(pair.interval > 0.0)) continue;
      set.interval_pairs.push_back({pair.interval, std::abs(signals[pair.a].value - signals[pair.b].value)});
    }
  }
  return set;
}

Calibration fit_calibration(const MappingSet& set, std::size_t degree) {
  auto fit = [&](const std::vector<MappingPair>& pairs, std::string_view name) {
    std::vector<Point> pts;
    for (const auto& p : pairs) pts.push_back({p.signal, p.attribute});
    try {
      return fit_poly(pts, degree);
    } catch (const Error& e) {
      throw Error("cannot fit " + std::string(name) + ": " + e.what());
    }
  };
  Calibration c;
  c.f_size = fit(set.size_pairs, "f_size");
  c.f_interval = fit(set.interval_pairs, "f_interval");
  c.f_color = fit(set.contrast_pairs, "f_color");
  c.provenance = Provenance::Fitted;
  return c;
}

namespace {

constexpr std::string_view kCalibrationHeader = "guifix-calibration 1";

double to_number(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("bad number '" + std::string(s) + "'");
  return v;
}

std::size_t to_count(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("bad count '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string serialize_calibration(const Calibration& c) {
  std::ostringstream out;
  out << kCalibrationHeader << '\n';
  out << "provenance " << to_string(c.provenance) << '\n';
  out << "units raw\n";
  auto curve = [&](std::string_view name, const PolyFit& f) {
    out << "curve " << name << ' ' << f.coefficients.size();
    for (double v : f.coefficients) out << ' ' << format_double(v);
    out << " rms " << format_double(f.residual_rms) << " samples " << f.samples << '\n';
  };
  curve("f_size", c.f_size);
  curve("f_interval", c.f_interval);
  curve("f_color", c.f_color);
  return out.str();
}

Calibration parse_calibration(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCalibrationHeader) {
    throw ParseError("not a calibration file (missing '" + std::string(kCalibrationHeader) + "')");
  }
  Calibration c;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "provenance") {
      std::string v;
      ls >> v;
      if (v == "fitted") c.provenance = Provenance::Fitted;
      else if (v == "published") c.provenance = Provenance::Published;
      else throw ParseError("unknown provenance '" + v + "'");
    } else if (key == "units") {
      std::string v;
      ls >> v;
      if (v != "raw") throw ParseError("unsupported calibration units '" + v + "'");
    } else if (key == "curve") {
      std::string name, count, tok;
      ls >> name >> count;
      PolyFit f;
      const auto n = to_count(count);
      for (std::size_t k = 0; k < n; ++k) {
        if (!(ls >> tok)) throw ParseError("curve " + name + " is missing coefficients");
        f.coefficients.push_back(to_number(tok));
      }
      std::string rms_key, rms, samples_key, samples;
      if (!(ls >> rms_key >> rms >> samples_key >> samples) || rms_key != "rms" || samples_key != "samples") {
        throw ParseError("curve " + name + ": expected 'rms <r> samples <n>'");
      }
      f.residual_rms = to_number(rms);
      f.samples = to_count(samples);
      if (name == "f_size") c.f_size = f;
      else if (name == "f_interval") c.f_interval = f;
      else if (name == "f_color") c.f_color = f;
      else throw ParseError("unknown curve '" + name + "'");
      seen.insert(name);
    } else {
      throw ParseError("unexpected calibration line '" + line + "'");
    }
  }
  for (const char* name : {"f_size", "f_interval", "f_color"}) {
    if (!seen.count(name)) throw ParseError(std::string("calibration file lacks curve ") + name);
  }
  return c;
}

void save_calibration(const Calibration& c, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_calibration(c));
}

Calibration load_calibration(const std::filesystem::path& path) { return parse_calibration(read_file(path)); }

std::string mapping_set_csv(const MappingSet& set) {
  std::ostringstream out;
  out << "kind,attribute,signal\n";
  auto rows = [&](std::string_view kind, const std::vector<MappingPair>& pairs) {
    for (const auto& p : pairs) out << kind << ',' << format_double(p.attribute) << ',' << format_double(p.signal) << '\n';
  };
  rows("size", set.size_pairs);
  rows("interval", set.interval_pairs);
  rows("contrast", set.contrast_pairs);
  return out.str();
}

}  // namespace guifix
