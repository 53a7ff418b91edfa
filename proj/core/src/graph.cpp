#include "guifix/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "guifix/detect.hpp"
#include "guifix/error.hpp"
#include "guifix/io.hpp"

namespace guifix {

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::CC: return "CC";
    case Relation::CV: return "CV";
    case Relation::VV: return "VV";
  }
  return "CC";
}

Relation relation_from_string(std::string_view s) {
  if (s == "CC") return Relation::CC;
  if (s == "CV") return Relation::CV;
  if (s == "VV") return Relation::VV;
  throw ParseError("unknown relation '" + std::string(s) + "'");
}

double facing_interval(const Rect& a, const Rect& b, Axis axis) {
  if (axis == Axis::X) return std::max(0.0, std::max(b.x - a.right(), a.x - b.right()));
  return std::max(0.0, std::max(b.y - a.bottom(), a.y - b.bottom()));
}

namespace {

// Corridor between facing sides; nullopt when the boxes overlap on both axes.
std::optional<Rect> corridor(const Rect& a, const Rect& b, Axis axis) {
  if (axis == Axis::X) {
    const Rect& l = a.x <= b.x ? a : b;
    const Rect& r = a.x <= b.x ? b : a;
    const double top = std::max(l.y, r.y), bottom = std::min(l.bottom(), r.bottom());
    return Rect{l.right(), top, r.x - l.right(), bottom - top};
  }
  const Rect& t = a.y <= b.y ? a : b;
  const Rect& u = a.y <= b.y ? b : a;
  const double left = std::max(t.x, u.x), right = std::min(t.right(), u.right());
  return Rect{left, t.bottom(), right - left, u.y - t.bottom()};
}

}  // namespace

std::vector<AdjacentPair> adjacent_pairs(const Wireframe& wf) {
  std::map<std::string, std::vector<std::size_t>> by_container;
  for (std::size_t i = 0; i < wf.components.size(); ++i) {
    by_container[wf.components[i].container_id].push_back(i);
  }

  std::vector<AdjacentPair> out;
  for (const auto& [cid, members] : by_container) {
    for (std::size_t p = 0; p < members.size(); ++p) {
      for (std::size_t q = p + 1; q < members.size(); ++q) {
        const std::size_t ia = members[p], ib = members[q];
        const Rect& a = wf.components[ia].bounds;
        const Rect& b = wf.components[ib].bounds;
        const bool ox = overlap_x(a, b), oy = overlap_y(a, b);
        if (!ox && !oy) continue;

        AdjacentPair pair{std::min(ia, ib), std::max(ia, ib), Axis::X, 0.0, false};
        if (ox && oy) {
          pair.containment = a.contains(b) || b.contains(a);
          pair.axis = (std::min(a.right(), b.right()) - std::max(a.x, b.x)) <=
                              (std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y))
                          ? Axis::X
                          : Axis::Y;
          out.push_back(pair);
          continue;
        }
        pair.axis = oy ? Axis::X : Axis::Y;
        const Rect lane = *corridor(a, b, pair.axis);
        bool blocked = false;
        for (std::size_t m : members) {
          if (m == ia || m == ib) continue;
          if (wf.components[m].bounds.intersects(lane)) {
            blocked = true;
            break;
          }
        }
        if (blocked) continue;
        pair.interval = facing_interval(a, b, pair.axis);
        out.push_back(pair);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const AdjacentPair& l, const AdjacentPair& r) {
    return std::tie(l.a, l.b) < std::tie(r.a, r.b);
  });
  return out;
}

std::size_t GuiGraph::component_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(),
                                                [](const GraphNode& n) { return n.kind == NodeKind::Component; }));
}

std::optional<int> GuiGraph::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<Relation> GuiGraph::relation_between(int a, int b) const {
  const int i = std::min(a, b), j = std::max(a, b);
  auto it = std::lower_bound(edges.begin(), edges.end(), Edge{i, j, Relation::CC});
  if (it != edges.end() && it->i == i && it->j == j) return it->rel;
  return std::nullopt;
}

std::size_t GuiGraph::degree(int node) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.i == node || e.j == node; }));
}

GuiGraph build_graph(const Wireframe& wf) {
  GuiGraph g;
  const double sw = wf.screen.width_dp(), sh = wf.screen.height_dp();
  g.screen_diagonal = std::sqrt(sw * sw + sh * sh);

  const auto pairs = adjacent_pairs(wf);
  const std::size_t nc = wf.components.size();

  std::vector<double> min_interval(nc, g.screen_diagonal);
  for (const auto& p : pairs) {
    min_interval[p.a] = std::min(min_interval[p.a], p.interval);
    min_interval[p.b] = std::min(min_interval[p.b], p.interval);
  }

  for (std::size_t i = 0; i < nc; ++i) {
    const auto& c = wf.components[i];
    GraphNode n;
    n.id = c.id;
    n.kind = NodeKind::Component;
    const Rgb color = c.color.value_or(wf.background_color);
    auto& a = n.attributes;
    a.x = c.bounds.x;
    a.y = c.bounds.y;
    a.w = c.bounds.w;
    a.h = c.bounds.h;
    a.r = color.r;
    a.g = color.g;
    a.b = color.b;
    a.size = std::min(c.bounds.w, c.bounds.h);
    a.min_interval = min_interval[i];
    a.contrast = contrast_ratio(color, wf.background_color);
    n.container = static_cast<int>(nc + *wf.container_index(c.container_id));
    g.nodes.push_back(std::move(n));
  }
  for (const auto& v : wf.containers) {
    GraphNode n;
    n.id = v.id;
    n.kind = NodeKind::Container;
    n.attributes = AttributeVector{0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    g.nodes.push_back(std::move(n));
  }

  for (const auto& p : pairs) g.edges.push_back(Edge::make(int(p.a), int(p.b), Relation::CC));
  for (std::size_t i = 0; i < nc; ++i) g.edges.push_back(Edge::make(int(i), g.nodes[i].container, Relation::CV));

  // Containers in reading order: top-to-bottom, then left-to-right, then id.
  std::vector<std::size_t> order(wf.containers.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    const auto& a = wf.containers[l];
    const auto& b = wf.containers[r];
    return std::tie(a.bounds.y, a.bounds.x, a.id) < std::tie(b.bounds.y, b.bounds.x, b.id);
  });
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    g.edges.push_back(Edge::make(int(nc + order[k]), int(nc + order[k + 1]), Relation::VV));
  }
  if (order.size() >= 3) {
    g.edges.push_back(Edge::make(int(nc + order.front()), int(nc + order.back()), Relation::VV));
  }

  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end(),
                            [](const Edge& l, const Edge& r) { return l.i == r.i && l.j == r.j; }),
                g.edges.end());
  return g;
}

GraphMatrices matrices(const GuiGraph& g) {
  const std::size_t n = g.size();
  GraphMatrices m;
  for (auto& a : m.adjacency) a = Matrix(n, n);
  for (const auto& e : g.edges) {
    auto& a = m.adjacency[static_cast<std::size_t>(e.rel)];
    a(e.i, e.j) = 1.0;
    a(e.j, e.i) = 1.0;
  }

  m.attributes = Matrix(n, AttributeVector::kSize);
  for (std::size_t i = 0; i < n; ++i) {
    const auto vals = g.nodes[i].attributes.values();
    for (std::size_t k = 0; k < vals.size(); ++k) m.attributes(i, k) = vals[k];
  }

  std::vector<double> inv_sqrt_deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (const auto& a : m.adjacency)
      for (std::size_t j = 0; j < n; ++j) d += a(i, j);
    inv_sqrt_deg[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  m.laplacian = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m.laplacian(i, i) = inv_sqrt_deg[i] > 0.0 ? 1.0 : 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double a = 0.0;
      for (const auto& adj : m.adjacency) a += adj(i, j);
      if (a != 0.0) m.laplacian(i, j) -= inv_sqrt_deg[i] * a * inv_sqrt_deg[j];
    }
  }
  return m;
}

NormStats fit_norm_stats(std::span<const GuiGraph> corpus) {
  NormStats s;
  s.min.assign(AttributeVector::kSize, 0.0);
  s.max.assign(AttributeVector::kSize, 0.0);
  bool first = true;
  for (const auto& g : corpus) {
    for (const auto& n : g.nodes) {
      if (n.kind != NodeKind::Component) continue;
      const auto v = n.attributes.values();
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (first) {
          s.min[k] = s.max[k] = v[k];
        } else {
          s.min[k] = std::min(s.min[k], v[k]);
          s.max[k] = std::max(s.max[k], v[k]);
        }
      }
      first = false;
    }
  }
  return s;
}

Matrix normalized_attributes(const GuiGraph& g, const NormStats& stats) {
  Matrix x(g.size(), AttributeVector::kSize);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.nodes[i].kind != NodeKind::Component) continue;
    const auto v = g.nodes[i].attributes.values();
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double span = stats.max[k] - stats.min[k];
      x(i, k) = span > 0.0 ? (v[k] - stats.min[k]) / span : 0.0;
    }
  }
  return x;
}

EdgeRemoval remove_edges_for(const GuiGraph& g, const std::set<std::string>& problem_ids) {
  std::set<int> problem;
  for (const auto& id : problem_ids) {
    auto idx = g.index_of(id);
    if (!idx) throw Error("unknown node id '" + id + "'");
    problem.insert(*idx);
  }
  EdgeRemoval out{g, {}};
  out.graph.edges.clear();
  for (const auto& e : g.edges) {
    if (problem.count(e.i) || problem.count(e.j)) out.removed.push_back(e);
    else out.graph.edges.push_back(e);
  }
  return out;
}

EdgeRemoval remove_random_edges(const GuiGraph& g, std::size_t k, std::uint64_t seed) {
  if (k > g.edges.size()) {
    throw Error("cannot remove " + std::to_string(k) + " edges from a graph with " +
                std::to_string(g.edges.size()));
  }
  std::vector<std::size_t> idx(g.edges.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<bool> drop(g.edges.size(), false);
  for (std::size_t i = 0; i < k; ++i) drop[idx[i]] = true;

  EdgeRemoval out{g, {}};
  out.graph.edges.clear();
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    (drop[i] ? out.removed : out.graph.edges).push_back(g.edges[i]);
  }
  return out;
}

std::string to_edge_list(const GuiGraph& g) {
  std::ostringstream os;
  for (std::size_t i = 0; i < g.size(); ++i) {
    os << "node " << i << ' ' << g.nodes[i].id << ' '
       << (g.nodes[i].kind == NodeKind::Component ? "component" : "container") << '\n';
  }
  for (const auto& e : g.edges) os << "edge " << e.i << ' ' << e.j << ' ' << to_string(e.rel) << '\n';
  return os.str();
}

GuiGraph parse_edge_list(std::string_view text) {
  GuiGraph g;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "node") {
      std::size_t idx = 0;
      std::string id, kind;
      if (!(ls >> idx >> id >> kind) || idx != g.nodes.size()) {
        throw ParseError("bad node line " + std::to_string(lineno));
      }
      GraphNode n;
      n.id = id;
      n.kind = kind == "container" ? NodeKind::Container : NodeKind::Component;
      g.nodes.push_back(std::move(n));
    } else if (tag == "edge") {
      int i = 0, j = 0;
      std::string rel;
      if (!(ls >> i >> j >> rel) || i < 0 || j < 0 || std::size_t(std::max(i, j)) >= g.nodes.size()) {
        throw ParseError("bad edge line " + std::to_string(lineno));
      }
      g.edges.push_back(Edge::make(i, j, relation_from_string(rel)));
    } else {
      throw ParseError("unknown record on line " + std::to_string(lineno));
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

std::string attributes_csv(const GuiGraph& g) {
  std::ostringstream os;
  os << "node_id";
  for (auto name : AttributeVector::kNames) os << ',' << name;
  os << '\n';
  for (const auto& n : g.nodes) {
    os << n.id;
    for (double v : n.attributes.values()) os << ',' << format_double(v);
    os << '\n';
  }
  return os.str();
}

}  // namespace guifix
