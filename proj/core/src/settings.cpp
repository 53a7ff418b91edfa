#include "guifix/settings.hpp"

#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "guifix/error.hpp"
#include "guifix/io.hpp"

namespace guifix {

namespace {

namespace pt = boost::property_tree;

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw Error("setting " + key + ": '" + v + "' is not a number");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw Error("setting " + key + ": '" + v + "' is not an integer");
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const auto n = to_int(key, v);
  if (n < 0) throw Error("setting " + key + " must be non-negative");
  return static_cast<std::size_t>(n);
}

// One entry per key: a setter from text and a getter for echoing.
struct Field {
  std::function<void(Settings&, const std::string&, const std::string&)> set;
  std::function<std::string(const Settings&)> get;
};

template <class Get>
Field dbl(Get g) {
  return {[g](Settings& s, const std::string& k, const std::string& v) { g(s) = to_double(k, v); },
          [g](const Settings& s) { return format_double(g(const_cast<Settings&>(s))); }};
}

template <class Get>
Field integer(Get g) {
  return {[g](Settings& s, const std::string& k, const std::string& v) {
            g(s) = static_cast<std::remove_reference_t<decltype(g(s))>>(to_int(k, v));
          },
          [g](const Settings& s) { return std::to_string(g(const_cast<Settings&>(s))); }};
}

template <class Get>
Field count(Get g) {
  return {[g](Settings& s, const std::string& k, const std::string& v) { g(s) = to_count(k, v); },
          [g](const Settings& s) { return std::to_string(g(const_cast<Settings&>(s))); }};
}

using Schema = std::map<std::string, std::map<std::string, Field>>;

const Schema& schema() {
  static const Schema s = [] {
    Schema m;
    auto& th = m["thresholds"];
    th["min_touch_dp"] = dbl([](Settings& s) -> double& { return s.thresholds.min_touch_dp; });
    th["min_interval_dp"] = dbl([](Settings& s) -> double& { return s.thresholds.min_interval_dp; });
    th["min_text_contrast"] = dbl([](Settings& s) -> double& { return s.thresholds.min_text_contrast; });
    th["min_large_text_contrast"] = dbl([](Settings& s) -> double& { return s.thresholds.min_large_text_contrast; });
    th["large_text_dp"] = dbl([](Settings& s) -> double& { return s.thresholds.large_text_dp; });
    th["min_nontext_contrast"] = dbl([](Settings& s) -> double& { return s.thresholds.min_nontext_contrast; });

    auto& tr = m["train"];
    tr["learning_rate"] = dbl([](Settings& s) -> double& { return s.train.learning_rate; });
    tr["epochs"] = integer([](Settings& s) -> int& { return s.train.epochs; });
    tr["negatives"] = count([](Settings& s) -> std::size_t& { return s.train.negatives; });
    tr["tolerance"] = dbl([](Settings& s) -> double& { return s.train.tolerance; });
    tr["dim"] = count([](Settings& s) -> std::size_t& { return s.train.dim; });
    tr["removed_edges"] = count([](Settings& s) -> std::size_t& { return s.train.removed_edges; });

    auto& sp = m["spectral"];
    sp["tolerance"] = dbl([](Settings& s) -> double& { return s.spectral.tolerance; });
    sp["window"] = count([](Settings& s) -> std::size_t& { return s.spectral.window; });
    sp["coefficient_index"] = count([](Settings& s) -> std::size_t& { return s.spectral.coefficient_index; });

    auto& pr = m["predict"];
    pr["max_iterations"] = integer([](Settings& s) -> int& { return s.predict.max_iterations; });
    pr["negatives"] = count([](Settings& s) -> std::size_t& { return s.predict.negatives; });

    auto& fx = m["fix"];
    fx["recolor_mode"] = {[](Settings& s, const std::string&, const std::string& v) {
                            s.fix.recolor_mode = recolor_mode_from_string(v);
                          },
                          [](const Settings& s) { return std::string(to_string(s.fix.recolor_mode)); }};
    fx["validation_rounds"] = integer([](Settings& s) -> int& { return s.fix.validation_rounds; });
    fx["co_adjust_trigger"] = dbl([](Settings& s) -> double& { return s.fix.co_adjust_trigger; });
    fx["co_adjust_cap"] = dbl([](Settings& s) -> double& { return s.fix.co_adjust_cap; });

    auto& ca = m["calibrate"];
    ca["removed_edges"] = count([](Settings& s) -> std::size_t& { return s.calibrate_removed_edges; });
    ca["degree"] = count([](Settings& s) -> std::size_t& { return s.calibrate_degree; });

    auto& sy = m["synth"];
    sy["screen_width_dp"] = dbl([](Settings& s) -> double& { return s.synth.screen_width_dp; });
    sy["screen_height_dp"] = dbl([](Settings& s) -> double& { return s.synth.screen_height_dp; });
    sy["density"] = dbl([](Settings& s) -> double& { return s.synth.density; });
    sy["min_containers"] = integer([](Settings& s) -> int& { return s.synth.min_containers; });
    sy["max_containers"] = integer([](Settings& s) -> int& { return s.synth.max_containers; });
    sy["min_components"] = integer([](Settings& s) -> int& { return s.synth.min_components; });
    sy["max_components"] = integer([](Settings& s) -> int& { return s.synth.max_components; });
    sy["patterns"] = {[](Settings& s, const std::string&, const std::string& v) {
                        s.synth.patterns.clear();
                        std::stringstream ss(v);
                        std::string item;
                        while (std::getline(ss, item, ',')) {
                          const auto b = item.find_first_not_of(' ');
                          const auto e = item.find_last_not_of(' ');
                          if (b == std::string::npos) continue;
                          s.synth.patterns.push_back(layout_pattern_from_string(item.substr(b, e - b + 1)));
                        }
                      },
                      [](const Settings& s) {
                        std::string out;
                        for (auto p : s.synth.patterns) {
                          if (!out.empty()) out += ",";
                          out += to_string(p);
                        }
                        return out;
                      }};
    sy["min_size"] = dbl([](Settings& s) -> double& { return s.synth.min_size; });
    sy["max_size"] = dbl([](Settings& s) -> double& { return s.synth.max_size; });
    sy["min_interval"] = dbl([](Settings& s) -> double& { return s.synth.min_interval; });
    sy["max_interval"] = dbl([](Settings& s) -> double& { return s.synth.max_interval; });
    sy["padding"] = dbl([](Settings& s) -> double& { return s.synth.padding; });
    sy["button_share"] = dbl([](Settings& s) -> double& { return s.synth.button_share; });
    sy["text_share"] = dbl([](Settings& s) -> double& { return s.synth.text_share; });
    sy["min_contrast"] = dbl([](Settings& s) -> double& { return s.synth.min_contrast; });

    auto& in = m["inject"];
    in["p_size"] = dbl([](Settings& s) -> double& { return s.inject.p_size; });
    in["p_interval"] = dbl([](Settings& s) -> double& { return s.inject.p_interval; });
    in["p_contrast"] = dbl([](Settings& s) -> double& { return s.inject.p_contrast; });
    in["min_shrunk"] = dbl([](Settings& s) -> double& { return s.inject.min_shrunk; });
    in["max_shrunk"] = dbl([](Settings& s) -> double& { return s.inject.max_shrunk; });
    in["min_squeezed"] = dbl([](Settings& s) -> double& { return s.inject.min_squeezed; });
    in["max_squeezed"] = dbl([](Settings& s) -> double& { return s.inject.max_squeezed; });
    in["min_washout"] = dbl([](Settings& s) -> double& { return s.inject.min_washout; });
    in["max_washout"] = dbl([](Settings& s) -> double& { return s.inject.max_washout; });
    return m;
  }();
  return s;
}

}  // namespace

void Settings::validate() const {
  thresholds.validate();
  train.validate();
  spectral.validate();
  if (predict.max_iterations < 1) throw Error("predict.max_iterations must be at least 1");
  if (predict.negatives < 1) throw Error("predict.negatives must be at least 1");
  if (fix.validation_rounds < 1) throw Error("fix.validation_rounds must be at least 1");
  if (!(fix.co_adjust_trigger >= 0.0) || !(fix.co_adjust_cap >= 0.0 && fix.co_adjust_cap < 1.0)) {
    throw Error("fix co-adjustment trigger must be >= 0 and cap in [0, 1)");
  }
  if (calibrate_degree < 1) throw Error("calibrate.degree must be at least 1");
  SynthConfig sc = synth;
  sc.thresholds = thresholds;
  sc.validate();
  inject.validate();
}

FixOptions Settings::fix_options(const TrainedModel& model, std::uint64_t seed) const {
  FixOptions o = fix;
  o.spectral = spectral;
  o.predict = predict;
  o.predict.learning_rate = model.config.learning_rate / 10.0;
  o.seed = seed;
  return o;
}

MappingProtocol Settings::mapping_protocol(const TrainedModel& model, std::uint64_t seed) const {
  MappingProtocol p;
  p.removed_edges = calibrate_removed_edges;
  p.seed = seed;
  p.spectral = spectral;
  p.predict = predict;
  p.predict.learning_rate = model.config.learning_rate / 10.0;
  return p;
}

Settings parse_settings(std::string_view text) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config: " + e.message() + " at line " + std::to_string(e.line()));
  }
  Settings s;
  const auto& sch = schema();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ParseError("config: key '" + section + "' outside a section");
    auto sec = sch.find(section);
    if (sec == sch.end()) throw ParseError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      auto f = sec->second.find(key);
      if (f == sec->second.end()) throw ParseError("config: unknown key " + section + "." + key);
      f->second.set(s, section + "." + key, value.data());
    }
  }
  s.synth.thresholds = s.thresholds;
  s.validate();
  return s;
}

Settings load_settings(const std::filesystem::path& path) { return parse_settings(read_file(path)); }

std::string settings_to_ini(const Settings& s) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, fields] : schema()) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    for (const auto& [key, field] : fields) out << key << " = " << field.get(s) << '\n';
  }
  return out.str();
}

}  // namespace guifix
