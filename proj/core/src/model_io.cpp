#include <algorithm>
#include <charconv>
#include <sstream>

#include "guifix/error.hpp"
#include "guifix/io.hpp"
#include "guifix/rgcn.hpp"

namespace guifix {

namespace {

constexpr std::string_view kHeader = "guifix-model 1";

std::string tensor_name(std::size_t layer, std::string_view what) {
  return "layer" + std::to_string(layer) + "." + std::string(what);
}

void write_row(std::ostringstream& out, std::span<const double> row) {
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (k) out << ',';
    out << format_double(row[k]);
  }
  out << '\n';
}

void write_matrix(std::ostringstream& out, const std::string& name, const Matrix& m) {
  out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) write_row(out, m.row(r));
}

double parse_number(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("model line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<double> parse_row(std::string_view s, std::size_t line) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    out.push_back(parse_number(s.substr(start, end - start), line));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    while (pos_ < text_.size()) {
      const auto nl = text_.find('\n', pos_);
      const auto end = nl == std::string_view::npos ? text_.size() : nl;
      line = text_.substr(pos_, end - pos_);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      pos_ = end + 1;
      ++number_;
      if (!line.empty()) return true;
    }
    return false;
  }

  std::string_view expect() {
    std::string_view line;
    if (!next(line)) throw ParseError("model file truncated after line " + std::to_string(number_));
    return line;
  }

  std::size_t number() const { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    const auto start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::size_t parse_count(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("model line " + std::to_string(line) + ": bad count '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string serialize_model(const TrainedModel& m) {
  std::ostringstream out;
  const auto& c = m.config;
  out << kHeader << '\n';
  out << "config learning_rate " << format_double(c.learning_rate) << '\n';
  out << "config epochs " << c.epochs << '\n';
  out << "config negatives " << c.negatives << '\n';
  out << "config seed " << c.seed << '\n';
  out << "config tolerance " << format_double(c.tolerance) << '\n';
  out << "config dim " << c.dim << '\n';
  out << "config removed_edges " << c.removed_edges << '\n';
  out << "shape " << m.params.attr_dim << ' ' << m.params.dim << '\n';

  for (std::size_t l = 0; l < kLayerCount; ++l) {
    for (Relation r : kRelations) {
      write_matrix(out, tensor_name(l, to_string(r)), m.params.layers[l].relation[static_cast<std::size_t>(r)]);
    }
    write_matrix(out, tensor_name(l, "self"), m.params.layers[l].self);
  }
  write_matrix(out, "relation_vectors", m.params.relation_vectors);

  const auto& norm = m.params.norm;
  out << "norm " << norm.min.size() << '\n';
  write_row(out, norm.min);
  write_row(out, norm.max);

  out << "loss_curve " << m.loss_curve.size() << '\n';
  for (double v : m.loss_curve) out << format_double(v) << '\n';
  return out.str();
}

TrainedModel parse_model(std::string_view text) {
  LineReader in(text);
  if (in.expect() != kHeader) throw ParseError("not a guifix model file (missing '" + std::string(kHeader) + "')");

  TrainedModel m;
  auto& p = m.params;
  bool have_shape = false;
  std::string_view line;
  while (in.next(line)) {
    const auto parts = split_ws(line);
    const auto ln = in.number();
    if (parts.empty()) continue;
    if (parts[0] == "config" && parts.size() == 3) {
      const auto key = parts[1];
      const auto val = parts[2];
      if (key == "learning_rate") m.config.learning_rate = parse_number(val, ln);
      else if (key == "epochs") m.config.epochs = static_cast<int>(parse_count(val, ln));
      else if (key == "negatives") m.config.negatives = parse_count(val, ln);
      else if (key == "seed") m.config.seed = parse_count(val, ln);
      else if (key == "tolerance") m.config.tolerance = parse_number(val, ln);
      else if (key == "dim") m.config.dim = parse_count(val, ln);
      else if (key == "removed_edges") m.config.removed_edges = parse_count(val, ln);
      else throw ParseError("model line " + std::to_string(ln) + ": unknown config key '" + std::string(key) + "'");
    } else if (parts[0] == "shape" && parts.size() == 3) {
      p = init_params(parse_count(parts[1], ln), parse_count(parts[2], ln), 0).zeros_like();
      have_shape = true;
    } else if (parts[0] == "matrix" && parts.size() == 4) {
      if (!have_shape) throw ParseError("model line " + std::to_string(ln) + ": matrix before shape");
      const std::string name(parts[1]);
      Matrix* target = nullptr;
      for (std::size_t l = 0; l < kLayerCount && !target; ++l) {
        for (Relation r : kRelations) {
          if (name == tensor_name(l, to_string(r))) target = &p.layers[l].relation[static_cast<std::size_t>(r)];
        }
        if (name == tensor_name(l, "self")) target = &p.layers[l].self;
      }
      if (name == "relation_vectors") target = &p.relation_vectors;
      if (!target) throw ParseError("model line " + std::to_string(ln) + ": unknown matrix '" + name + "'");
      const auto rows = parse_count(parts[2], ln), cols = parse_count(parts[3], ln);
      if (rows != target->rows() || cols != target->cols()) {
        throw ParseError("model line " + std::to_string(ln) + ": matrix '" + name + "' has the wrong shape");
      }
      for (std::size_t r = 0; r < rows; ++r) {
        const auto row = parse_row(in.expect(), in.number());
        if (row.size() != cols) throw ParseError("model line " + std::to_string(in.number()) + ": wrong row width");
        std::copy(row.begin(), row.end(), target->row(r).begin());
      }
    } else if (parts[0] == "norm" && parts.size() == 2) {
      const auto n = parse_count(parts[1], ln);
      if (n > 0) {
        p.norm.min = parse_row(in.expect(), in.number());
        p.norm.max = parse_row(in.expect(), in.number());
        if (p.norm.min.size() != n || p.norm.max.size() != n) {
          throw ParseError("model line " + std::to_string(in.number()) + ": normalization width mismatch");
        }
      }
    } else if (parts[0] == "loss_curve" && parts.size() == 2) {
      const auto n = parse_count(parts[1], ln);
      for (std::size_t k = 0; k < n; ++k) m.loss_curve.push_back(parse_number(in.expect(), in.number()));
    } else {
      throw ParseError("model line " + std::to_string(ln) + ": unexpected '" + std::string(line) + "'");
    }
  }
  if (!have_shape) throw ParseError("model file has no shape line");
  if (!p.all_finite()) throw ParseError("model file contains non-finite weights");
  return m;
}

void save_model(const TrainedModel& m, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(m));
}

TrainedModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

}  // namespace guifix
