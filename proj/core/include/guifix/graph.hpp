#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guifix/matrix.hpp"
#include "guifix/wireframe.hpp"

namespace guifix {

/// Edge relations: component-component, component-container,
/// container-container.
enum class Relation : int { CC = 0, CV = 1, VV = 2 };
inline constexpr std::size_t kRelationCount = 3;
inline constexpr std::array<Relation, kRelationCount> kRelations{Relation::CC, Relation::CV, Relation::VV};

std::string_view to_string(Relation r);
Relation relation_from_string(std::string_view s);

enum class NodeKind { Component, Container };

/// Undirected edge, normalized so that i < j.
struct Edge {
  int i = 0;
  int j = 0;
  Relation rel = Relation::CC;

  static Edge make(int a, int b, Relation rel) { return a < b ? Edge{a, b, rel} : Edge{b, a, rel}; }
  auto operator<=>(const Edge&) const = default;
};

/// Per-component attribute row: bounds (4), color (3), size, min interval,
/// contrast against the background.
struct AttributeVector {
  static constexpr std::size_t kSize = 10;
  static constexpr std::array<std::string_view, kSize> kNames{
      "x", "y", "w", "h", "r", "g", "b", "size", "min_interval", "contrast"};

  double x = 0, y = 0, w = 0, h = 0;
  double r = 0, g = 0, b = 0;
  double size = 0;
  double min_interval = 0;
  double contrast = 1;

  std::array<double, kSize> values() const { return {x, y, w, h, r, g, b, size, min_interval, contrast}; }
};

struct GraphNode {
  std::string id;
  NodeKind kind = NodeKind::Component;
  AttributeVector attributes;  // zero for containers
  int container = -1;          // graph index of the holding container (components)
};

enum class Axis { X, Y };

/// Two components of one container that are adjacent under the corridor
/// rule.  `axis` is the direction along which they face each other.
struct AdjacentPair {
  std::size_t a = 0;  // wireframe component index, a < b
  std::size_t b = 0;
  Axis axis = Axis::X;
  double interval = 0.0;
  bool containment = false;  // one holds the other
};

/// Gap between facing sides along the corridor axis (0 when touching or
/// overlapping).  Requires projection overlap on the other axis.
double facing_interval(const Rect& a, const Rect& b, Axis axis);

/// Components i, j of one container are adjacent iff their x- or y-
/// projections overlap and the corridor between their facing sides
/// intersects no third component of that container.
std::vector<AdjacentPair> adjacent_pairs(const Wireframe& wf);

/// Graph nodes: components first (wireframe order), then containers.
struct GuiGraph {
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;  // sorted, unique
  double screen_diagonal = 0.0;

  std::size_t size() const { return nodes.size(); }
  std::size_t component_count() const;
  std::optional<int> index_of(std::string_view id) const;
  std::optional<Relation> relation_between(int a, int b) const;
  bool has_edge(int a, int b) const { return relation_between(a, b).has_value(); }
  std::size_t degree(int node) const;
};

GuiGraph build_graph(const Wireframe& wf);

struct GraphMatrices {
  std::array<Matrix, kRelationCount> adjacency;
  Matrix attributes;  // raw, rows = nodes
  Matrix laplacian;   // I - D^-1/2 A D^-1/2 over the union adjacency
};

GraphMatrices matrices(const GuiGraph& g);

/// Per-column min-max statistics over component rows of a corpus.
struct NormStats {
  std::vector<double> min;
  std::vector<double> max;

  bool empty() const { return min.empty(); }
  bool operator==(const NormStats&) const = default;
};

NormStats fit_norm_stats(std::span<const GuiGraph> corpus);

/// Min-max normalized attribute matrix; container rows stay zero and
/// constant columns map to 0.  Values outside the fitted range are not
/// clipped.
Matrix normalized_attributes(const GuiGraph& g, const NormStats& stats);

struct EdgeRemoval {
  GuiGraph graph;
  std::vector<Edge> removed;
};

/// Drops every edge incident to any of the given nodes.
EdgeRemoval remove_edges_for(const GuiGraph& g, const std::set<std::string>& problem_ids);

/// Drops k distinct edges chosen uniformly at random; deterministic per seed.
EdgeRemoval remove_random_edges(const GuiGraph& g, std::size_t k, std::uint64_t seed);

/// "node <index> <id> <kind>" lines followed by "edge <i> <j> <REL>" lines.
std::string to_edge_list(const GuiGraph& g);
GuiGraph parse_edge_list(std::string_view text);
/// node_id plus one column per attribute.
std::string attributes_csv(const GuiGraph& g);

}  // namespace guifix
