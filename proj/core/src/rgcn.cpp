#include "guifix/rgcn.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "guifix/error.hpp"
#include "guifix/random.hpp"

namespace guifix {

namespace {

constexpr double kLogClamp = 1e-12;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct TripleLoss {
  double value;  // contribution before the -1/N factor is applied
  double dscore; // d(-term)/d(score)
};

// -[y log p + (1-y) log(1-p)] and its derivative in the score, with log
// arguments clamped at 1e-12 (zero derivative inside the clamp).
TripleLoss triple_loss(double f, double y) {
  const double log_clamp = std::log(kLogClamp);
  double log_p = -softplus(-f);
  double log_q = -softplus(f);
  const double p = sigmoid(f);
  double dp = 0.0, dq = 0.0;
  if (log_p < log_clamp) log_p = log_clamp;
  else dp = 1.0 - p;  // d log p / df
  if (log_q < log_clamp) log_q = log_clamp;
  else dq = -p;       // d log(1-p) / df
  return {-(y * log_p + (1.0 - y) * log_q), -(y * dp + (1.0 - y) * dq)};
}

struct ForwardCache {
  std::array<Matrix, kRelationCount> agg0;  // P_r X
  Matrix z1, h1;
  std::array<Matrix, kRelationCount> agg1;  // P_r H1
  Matrix z2, h2;
  Matrix emb;
};

Matrix relu(const Matrix& z) {
  Matrix h = z;
  for (double& v : h.data()) v = v > 0.0 ? v : 0.0;
  return h;
}

ForwardCache forward_cached(const ModelParams& p, const GraphInput& in) {
  if (in.features.cols() != p.attr_dim) {
    throw Error("attribute width " + std::to_string(in.features.cols()) + " does not match model input " +
                std::to_string(p.attr_dim));
  }
  for (const auto& a : in.propagation) {
    if (a.rows() != in.features.rows() || a.cols() != in.features.rows()) {
      throw Error("propagation matrix shape does not match node count");
    }
  }
  ForwardCache c;
  c.z1 = multiply(in.features, p.layers[0].self);
  for (std::size_t r = 0; r < kRelationCount; ++r) {
    c.agg0[r] = multiply(in.propagation[r], in.features);
    c.z1 += multiply(c.agg0[r], p.layers[0].relation[r]);
  }
  c.h1 = relu(c.z1);
  c.z2 = multiply(c.h1, p.layers[1].self);
  for (std::size_t r = 0; r < kRelationCount; ++r) {
    c.agg1[r] = multiply(in.propagation[r], c.h1);
    c.z2 += multiply(c.agg1[r], p.layers[1].relation[r]);
  }
  c.h2 = relu(c.z2);
  c.emb = c.h1;
  for (std::size_t i = 0; i < c.emb.size(); ++i) c.emb.data()[i] = std::max(c.h1.data()[i], c.h2.data()[i]);
  return c;
}

void mask_relu(Matrix& grad, const Matrix& z) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!(z.data()[i] > 0.0)) grad.data()[i] = 0.0;
}

Matrix glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-bound, bound);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = u(rng);
  return m;
}

struct AdamState {
  ModelParams m, v;
  int t = 0;
};

void adam_step(ModelParams& p, const ModelParams& grad, AdamState& st, double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++st.t;
  const double c1 = 1.0 - std::pow(b1, st.t), c2 = 1.0 - std::pow(b2, st.t);
  auto pt = p.tensors();
  auto gt = grad.tensors();
  auto mt = st.m.tensors();
  auto vt = st.v.tensors();
  for (std::size_t k = 0; k < pt.size(); ++k) {
    auto& pd = pt[k]->data();
    const auto& gd = gt[k]->data();
    auto& md = mt[k]->data();
    auto& vd = vt[k]->data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
      md[i] = b1 * md[i] + (1.0 - b1) * gd[i];
      vd[i] = b2 * vd[i] + (1.0 - b2) * gd[i] * gd[i];
      pd[i] -= lr * (md[i] / c1) / (std::sqrt(vd[i] / c2) + eps);
    }
  }
}

}  // namespace

GraphInput prepare_input(const GuiGraph& g, const NormStats& stats) {
  const auto m = matrices(g);
  GraphInput in;
  for (std::size_t r = 0; r < kRelationCount; ++r) {
    Matrix a = m.adjacency[r];
    for (std::size_t i = 0; i < a.rows(); ++i) {
      double deg = 0.0;
      for (double v : a.row(i)) deg += v;
      if (deg > 0.0)
        for (double& v : a.row(i)) v /= deg;
    }
    in.propagation[r] = std::move(a);
  }
  in.features = stats.empty() ? m.attributes : normalized_attributes(g, stats);
  return in;
}

std::vector<Matrix*> ModelParams::tensors() {
  std::vector<Matrix*> out;
  for (auto& l : layers) {
    for (auto& w : l.relation) out.push_back(&w);
    out.push_back(&l.self);
  }
  out.push_back(&relation_vectors);
  return out;
}

std::vector<const Matrix*> ModelParams::tensors() const {
  std::vector<const Matrix*> out;
  for (const auto& l : layers) {
    for (const auto& w : l.relation) out.push_back(&w);
    out.push_back(&l.self);
  }
  out.push_back(&relation_vectors);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* t : tensors()) n += t->size();
  return n;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.attr_dim = attr_dim;
  z.dim = dim;
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    for (std::size_t r = 0; r < kRelationCount; ++r) {
      z.layers[l].relation[r] = Matrix(layers[l].relation[r].rows(), layers[l].relation[r].cols());
    }
    z.layers[l].self = Matrix(layers[l].self.rows(), layers[l].self.cols());
  }
  z.relation_vectors = Matrix(relation_vectors.rows(), relation_vectors.cols());
  return z;
}

bool ModelParams::all_finite() const {
  for (const auto* t : tensors())
    for (double v : t->data())
      if (!std::isfinite(v)) return false;
  return true;
}

ModelParams init_params(std::size_t attr_dim, std::size_t dim, std::uint64_t seed) {
  if (attr_dim == 0 || dim == 0) throw Error("model dimensions must be positive");
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.attr_dim = attr_dim;
  p.dim = dim;
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const std::size_t in = l == 0 ? attr_dim : dim;
    for (auto& w : p.layers[l].relation) w = glorot(in, dim, rng);
    p.layers[l].self = glorot(in, dim, rng);
  }
  // Each relation vector is treated as a 1 x dim matrix.
  p.relation_vectors = Matrix(kRelationCount, dim);
  const double bound = std::sqrt(6.0 / static_cast<double>(1 + dim));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& v : p.relation_vectors.data()) v = u(rng);
  return p;
}

Matrix forward(const ModelParams& p, const GraphInput& in) { return forward_cached(p, in).emb; }

double score(const ModelParams& p, const Matrix& embeddings, int s, Relation r, int o) {
  const auto es = embeddings.row(static_cast<std::size_t>(s));
  const auto eo = embeddings.row(static_cast<std::size_t>(o));
  const auto rv = p.relation_vectors.row(static_cast<std::size_t>(r));
  double acc = 0.0;
  for (std::size_t k = 0; k < es.size(); ++k) acc += es[k] * rv[k] * eo[k];
  return acc;
}

double loss_from_scores(std::span<const double> scores, std::span<const double> labels) {
  if (scores.empty()) throw Error("loss over an empty triple set");
  if (scores.size() != labels.size()) throw Error("score/label count mismatch");
  double total = 0.0;
  for (std::size_t t = 0; t < scores.size(); ++t) total += triple_loss(scores[t], labels[t]).value;
  return total / static_cast<double>(scores.size());
}

double loss(const ModelParams& p, const GraphInput& in, std::span<const Triple> positives,
            std::span<const Triple> negatives) {
  if (positives.empty()) throw Error("loss requires at least one positive triple");
  const Matrix emb = forward(p, in);
  std::vector<double> scores, labels;
  for (auto set : {positives, negatives}) {
    for (const auto& t : set) {
      scores.push_back(score(p, emb, t.s, t.r, t.o));
      labels.push_back(t.y);
    }
  }
  return loss_from_scores(scores, labels);
}

double loss_and_gradient(const ModelParams& p, const GraphInput& in, std::span<const Triple> triples,
                         ModelParams& grad) {
  if (triples.empty()) throw Error("loss requires at least one triple");
  const ForwardCache c = forward_cached(p, in);
  const double inv_n = 1.0 / static_cast<double>(triples.size());
  const std::size_t d = p.dim;

  Matrix d_emb(c.emb.rows(), d);
  double total = 0.0;
  for (const auto& t : triples) {
    const double f = score(p, c.emb, t.s, t.r, t.o);
    const auto tl = triple_loss(f, t.y);
    total += tl.value;
    const double g = tl.dscore * inv_n;
    if (g == 0.0) continue;
    const auto es = c.emb.row(t.s);
    const auto eo = c.emb.row(t.o);
    const auto rv = p.relation_vectors.row(static_cast<std::size_t>(t.r));
    auto ds = d_emb.row(t.s);
    auto dov = d_emb.row(t.o);
    auto dr = grad.relation_vectors.row(static_cast<std::size_t>(t.r));
    for (std::size_t k = 0; k < d; ++k) {
      ds[k] += g * rv[k] * eo[k];
      dov[k] += g * rv[k] * es[k];
      dr[k] += g * es[k] * eo[k];
    }
  }

  // Max-pool routes the gradient to the larger layer output (layer 1 on ties).
  Matrix d_h1(c.h1.rows(), d), d_h2(c.h2.rows(), d);
  for (std::size_t i = 0; i < d_emb.size(); ++i) {
    if (c.h1.data()[i] >= c.h2.data()[i]) d_h1.data()[i] = d_emb.data()[i];
    else d_h2.data()[i] = d_emb.data()[i];
  }

  Matrix d_z2 = d_h2;
  mask_relu(d_z2, c.z2);
  const auto& l2 = p.layers[1];
  grad.layers[1].self += multiply_at_b(c.h1, d_z2);
  d_h1 += multiply_a_bt(d_z2, l2.self);
  for (std::size_t r = 0; r < kRelationCount; ++r) {
    grad.layers[1].relation[r] += multiply_at_b(c.agg1[r], d_z2);
    // d(P_r H1 W_r)/dH1 = P_rᵀ (dZ2 W_rᵀ)
    d_h1 += multiply_at_b(in.propagation[r], multiply_a_bt(d_z2, l2.relation[r]));
  }

  Matrix d_z1 = d_h1;
  mask_relu(d_z1, c.z1);
  grad.layers[0].self += multiply_at_b(in.features, d_z1);
  for (std::size_t r = 0; r < kRelationCount; ++r) {
    grad.layers[0].relation[r] += multiply_at_b(c.agg0[r], d_z1);
  }
  return total * inv_n;
}

bool kinds_match(const GuiGraph& g, int a, int b, Relation r) {
  if (a == b) return false;
  const auto ka = g.nodes[a].kind, kb = g.nodes[b].kind;
  switch (r) {
    case Relation::CC: return ka == NodeKind::Component && kb == NodeKind::Component;
    case Relation::CV: return ka != kb;
    case Relation::VV: return ka == NodeKind::Container && kb == NodeKind::Container;
  }
  return false;
}

std::vector<Triple> positive_triples(const GuiGraph& g) {
  std::vector<Triple> out;
  out.reserve(g.edges.size());
  for (const auto& e : g.edges) out.push_back({e.i, e.rel, e.j, 1.0});
  return out;
}

std::vector<Triple> sample_negatives(const GuiGraph& g, std::span<const Triple> positives, std::size_t omega,
                                     std::mt19937_64& rng) {
  std::vector<int> components, containers;
  for (std::size_t i = 0; i < g.size(); ++i) {
    (g.nodes[i].kind == NodeKind::Component ? components : containers).push_back(static_cast<int>(i));
  }
  auto pool_of = [&](int node) -> const std::vector<int>& {
    return g.nodes[node].kind == NodeKind::Component ? components : containers;
  };

  std::vector<Triple> out;
  out.reserve(positives.size() * omega);
  std::bernoulli_distribution coin(0.5);
  for (const auto& pos : positives) {
    for (std::size_t k = 0; k < omega; ++k) {
      bool found = false;
      for (int attempt = 0; attempt < 32 && !found; ++attempt) {
        const bool corrupt_object = coin(rng);
        const int keep = corrupt_object ? pos.s : pos.o;
        const int replaced = corrupt_object ? pos.o : pos.s;
        const auto& pool = pool_of(replaced);
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const int cand = pool[pick(rng)];
        if (cand == keep || g.has_edge(keep, cand)) continue;
        out.push_back(corrupt_object ? Triple{keep, pos.r, cand, 0.0} : Triple{cand, pos.r, keep, 0.0});
        found = true;
      }
      if (found) continue;
      const auto slots = candidate_slots(g, pos.r);
      if (slots.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
      const auto& e = slots[pick(rng)];
      out.push_back({e.i, pos.r, e.j, 0.0});
    }
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (epochs <= 0) throw Error("epochs must be positive");
  if (negatives < 1) throw Error("at least one negative per positive is required");
  if (dim == 0) throw Error("embedding dimension must be positive");
  if (tolerance < 0.0) throw Error("tolerance must be non-negative");
}

TrainedModel train(std::span<const GuiGraph> corpus, const TrainConfig& cfg,
                   const std::function<void(int, double)>& on_epoch) {
  cfg.validate();
  if (corpus.empty()) throw Error("training corpus is empty");

  TrainedModel model;
  model.config = cfg;
  model.params = init_params(AttributeVector::kSize, cfg.dim, cfg.seed);
  model.params.norm = fit_norm_stats(corpus);

  AdamState adam{model.params.zeros_like(), model.params.zeros_like(), 0};
  std::vector<std::vector<Triple>> positives;
  for (const auto& g : corpus) positives.push_back(positive_triples(g));

  int plateau = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    ModelParams grad = model.params.zeros_like();
    double epoch_loss = 0.0;
    std::size_t used = 0;
    for (std::size_t gi = 0; gi < corpus.size(); ++gi) {
      const GuiGraph& g = corpus[gi];
      if (positives[gi].empty()) continue;
      const std::uint64_t s = mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch), gi);
      const std::size_t k = std::min(cfg.removed_edges, g.edges.size() > 1 ? g.edges.size() - 1 : 0);
      const EdgeRemoval removal = remove_random_edges(g, k, s);
      const GraphInput in = prepare_input(removal.graph, model.params.norm);

      std::mt19937_64 rng(mix_seed(s, 0xA5));
      std::vector<Triple> triples = positives[gi];
      const auto neg = sample_negatives(g, positives[gi], cfg.negatives, rng);
      triples.insert(triples.end(), neg.begin(), neg.end());
      epoch_loss += loss_and_gradient(model.params, in, triples, grad);
      ++used;
    }
    if (used == 0) throw Error("training corpus has no edges");
    epoch_loss /= static_cast<double>(used);
    if (!std::isfinite(epoch_loss) || !grad.all_finite()) {
      throw Error("training diverged at epoch " + std::to_string(epoch) + " (loss " + std::to_string(epoch_loss) +
                  "); lower the learning rate");
    }
    adam_step(model.params, grad, adam, cfg.learning_rate);
    model.loss_curve.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);

    const std::size_t n = model.loss_curve.size();
    if (n >= 2 && std::abs(model.loss_curve[n - 1] - model.loss_curve[n - 2]) < cfg.tolerance) {
      if (++plateau >= 10) break;
    } else {
      plateau = 0;
    }
  }
  return model;
}

std::vector<Edge> candidate_slots(const GuiGraph& observed, Relation r) {
  std::vector<Edge> out;
  const int n = static_cast<int>(observed.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (kinds_match(observed, i, j, r) && !observed.has_edge(i, j)) out.push_back({i, j, r});
    }
  }
  return out;
}

Prediction predict_links(const TrainedModel& model, const GuiGraph& observed, std::span<const Edge> removed,
                         IterationObserver& observer, const PredictOptions& opts) {
  ModelParams params = model.params;
  const GraphInput in = prepare_input(observed, params.norm);
  const auto positives = positive_triples(observed);
  std::mt19937_64 rng(opts.seed);

  Prediction out;
  Matrix emb;
  const int cap = std::max(1, opts.max_iterations);
  for (int it = 0; it < cap; ++it) {
    emb = forward(params, in);
    for (std::size_t node = 0; node < emb.rows(); ++node) {
      observer.on_embedding(static_cast<int>(node), it, emb.row(node));
    }
    out.iterations = it + 1;
    if (observer.all_converged()) {
      out.converged = true;
      break;
    }
    if (it + 1 == cap || positives.empty()) continue;

    std::vector<Triple> triples = positives;
    const auto neg = sample_negatives(observed, positives, opts.negatives, rng);
    triples.insert(triples.end(), neg.begin(), neg.end());
    ModelParams grad = params.zeros_like();
    loss_and_gradient(params, in, triples, grad);
    auto pt = params.tensors();
    auto gt = grad.tensors();
    for (std::size_t k = 0; k < pt.size(); ++k) {
      auto& pd = pt[k]->data();
      const auto& gd = gt[k]->data();
      for (std::size_t i = 0; i < pd.size(); ++i) pd[i] -= opts.learning_rate * gd[i];
    }
  }

  std::array<bool, kRelationCount> wanted{};
  for (const auto& e : removed) wanted[static_cast<std::size_t>(e.rel)] = true;
  for (Relation r : kRelations) {
    if (!wanted[static_cast<std::size_t>(r)]) continue;
    for (const auto& slot : candidate_slots(observed, r)) {
      const bool is_removed = std::any_of(removed.begin(), removed.end(),
                                          [&](const Edge& e) { return e.i == slot.i && e.j == slot.j; });
      out.ranked.push_back({slot, score(params, emb, slot.i, r, slot.j), is_removed});
    }
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const ScoredEdge& a, const ScoredEdge& b) { return a.score > b.score; });
  return out;
}

LinkEvaluation evaluate_link_prediction(const ModelParams& p, std::span<const GuiGraph> graphs, std::size_t k,
                                        std::uint64_t seed) {
  LinkEvaluation ev;
  double model_sum = 0.0, random_sum = 0.0;
  std::mt19937_64 random_scorer(mix_seed(seed, 0x5C0E));
  std::uniform_real_distribution<double> u(0.0, 1.0);

  auto rank_of = [](double truth, const std::vector<double>& others) {
    double rank = 1.0;
    for (double s : others) {
      if (s > truth) rank += 1.0;
      else if (s == truth) rank += 0.5;
    }
    return rank;
  };

  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const GuiGraph& g = graphs[gi];
    if (g.edges.empty()) continue;
    const auto removal = remove_random_edges(g, std::min(k, g.edges.size()), mix_seed(seed, gi));
    const Matrix emb = forward(p, prepare_input(removal.graph, p.norm));
    for (const auto& truth : removal.removed) {
      std::vector<double> model_others, random_others;
      for (const auto& slot : candidate_slots(removal.graph, truth.rel)) {
        const bool also_removed = std::any_of(removal.removed.begin(), removal.removed.end(),
                                              [&](const Edge& e) { return e.i == slot.i && e.j == slot.j; });
        if (also_removed) continue;  // filtered setting
        model_others.push_back(score(p, emb, slot.i, truth.rel, slot.j));
        random_others.push_back(u(random_scorer));
      }
      const double truth_model = score(p, emb, truth.i, truth.rel, truth.j);
      const double truth_random = u(random_scorer);
      model_sum += 1.0 / rank_of(truth_model, model_others);
      random_sum += 1.0 / rank_of(truth_random, random_others);
      ++ev.queries;
    }
  }
  if (ev.queries > 0) {
    ev.model_mrr = model_sum / static_cast<double>(ev.queries);
    ev.random_mrr = random_sum / static_cast<double>(ev.queries);
  }
  return ev;
}

}  // namespace guifix
