#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guifix/graph.hpp"
#include "guifix/matrix.hpp"

namespace guifix {

inline constexpr std::size_t kLayerCount = 2;

/// Encoder input for one graph: per-relation propagation matrices with
/// 1/|N_i^r| row normalization, plus the normalized attribute matrix.
struct GraphInput {
  std::array<Matrix, kRelationCount> propagation;
  Matrix features;
};

GraphInput prepare_input(const GuiGraph& g, const NormStats& stats);

struct LayerWeights {
  std::array<Matrix, kRelationCount> relation;  // in_dim x dim
  Matrix self;                                  // in_dim x dim

  bool operator==(const LayerWeights&) const = default;
};

/// R-GCN weights for two propagation layers plus the DistMult diagonal
/// relation vectors, and the attribute statistics the model was trained on.
struct ModelParams {
  std::size_t attr_dim = 0;
  std::size_t dim = 0;
  std::array<LayerWeights, kLayerCount> layers;
  Matrix relation_vectors;  // kRelationCount x dim
  NormStats norm;

  /// Every trainable tensor in a fixed order.
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::size_t parameter_count() const;
  /// Same shapes, all zeros, no statistics.
  ModelParams zeros_like() const;
  bool all_finite() const;

  bool operator==(const ModelParams&) const = default;
};

/// Glorot-uniform initialization, deterministic per seed.
ModelParams init_params(std::size_t attr_dim, std::size_t dim, std::uint64_t seed);

/// Node embeddings (n x dim): two ReLU propagation layers
///   h_i' = ReLU( sum_r sum_{j in N_i^r} W_r h_j / |N_i^r| + W_0 h_i )
/// followed by an element-wise max over the two layer outputs.
Matrix forward(const ModelParams& p, const GraphInput& in);

/// DistMult: sum_k e_s[k] * R_r[k] * e_o[k].
double score(const ModelParams& p, const Matrix& embeddings, int s, Relation r, int o);

struct Triple {
  int s = 0;
  Relation r = Relation::CC;
  int o = 0;
  double y = 1.0;
};

/// Binary cross-entropy over logistic scores, normalized by the number of
/// triples ((1 + omega) |E| when every positive got omega negatives).  Log
/// arguments are clamped at 1e-12.
double loss_from_scores(std::span<const double> scores, std::span<const double> labels);

double loss(const ModelParams& p, const GraphInput& in, std::span<const Triple> positives,
            std::span<const Triple> negatives);

/// Loss over `triples` with analytic gradients accumulated into `grad`
/// (which must have the shapes of `p`).
double loss_and_gradient(const ModelParams& p, const GraphInput& in, std::span<const Triple> triples,
                         ModelParams& grad);

/// Does the node pair have the endpoint kinds of the relation?
bool kinds_match(const GuiGraph& g, int a, int b, Relation r);

std::vector<Triple> positive_triples(const GuiGraph& g);

/// omega negatives per positive, made by replacing one endpoint with a
/// uniformly drawn node of the same kind and rejecting existing edges of
/// `g`.  Falls back to a uniform non-edge of the relation when corruption
/// keeps failing; positives with no possible negative are skipped.
std::vector<Triple> sample_negatives(const GuiGraph& g, std::span<const Triple> positives, std::size_t omega,
                                     std::mt19937_64& rng);

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 200;
  std::size_t negatives = 1;  // omega
  std::uint64_t seed = 1;
  double tolerance = 1e-7;     // loss plateau, checked over 10 epochs
  std::size_t dim = 16;
  std::size_t removed_edges = 3;  // hidden from message passing per graph and epoch

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainedModel {
  ModelParams params;
  TrainConfig config;
  std::vector<double> loss_curve;  // mean per-graph loss, one entry per epoch

  bool operator==(const TrainedModel&) const = default;
};

/// Full-batch Adam (beta 0.9/0.999, eps 1e-8) on the link-prediction loss
/// summed over graphs.  Each epoch hides `removed_edges` random edges of
/// every graph from the encoder while still scoring them as positives.
/// Throws Error if the loss becomes non-finite.
TrainedModel train(std::span<const GuiGraph> corpus, const TrainConfig& cfg,
                   const std::function<void(int, double)>& on_epoch = {});

/// Receives every node embedding after each prediction iteration.
class IterationObserver {
 public:
  virtual ~IterationObserver() = default;
  virtual void on_embedding(int node, int iteration, std::span<const double> embedding) = 0;
  /// Queried after each full pass; true stops the loop.
  virtual bool all_converged() const = 0;
};

struct PredictOptions {
  int max_iterations = 500;
  double learning_rate = 0.001;  // training rate / 10
  std::size_t negatives = 1;
  std::uint64_t seed = 0;
};

struct ScoredEdge {
  Edge edge;
  double score = 0.0;
  bool removed = false;
};

struct Prediction {
  std::vector<ScoredEdge> ranked;  // best first
  bool converged = false;
  int iterations = 0;
};

/// Unobserved slots of relation r with matching endpoint kinds.
std::vector<Edge> candidate_slots(const GuiGraph& observed, Relation r);

/// Iterative refinement on a graph with removed edges: each pass runs the
/// encoder, reports embeddings to the observer, then takes one gradient
/// step on the observed edges.  Stops once the observer reports
/// convergence (at least one pass always runs) or at max_iterations.
/// Candidates are the unobserved slots of every relation that lost an edge.
Prediction predict_links(const TrainedModel& model, const GuiGraph& observed, std::span<const Edge> removed,
                         IterationObserver& observer, const PredictOptions& opts);

struct LinkEvaluation {
  double model_mrr = 0.0;
  double random_mrr = 0.0;
  std::size_t queries = 0;
};

/// Filtered MRR of removed edges against the unobserved slots of their
/// relation, for the model and for a seeded uniform-random scorer.
LinkEvaluation evaluate_link_prediction(const ModelParams& p, std::span<const GuiGraph> graphs, std::size_t k,
                                        std::uint64_t seed);

// Model file: "guifix-model 1" header, key/value config echo, named CSV
// matrix blocks (weights and normalization statistics), loss curve.
std::string serialize_model(const TrainedModel& m);
TrainedModel parse_model(std::string_view text);
void save_model(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace guifix
