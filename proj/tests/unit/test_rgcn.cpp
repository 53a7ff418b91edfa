#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "guifix/error.hpp"
#include "guifix/rgcn.hpp"
#include "guifix/synth.hpp"
#include "guifix/wireframe.hpp"

using namespace guifix;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (double& v : m.data()) v = u(rng);
  return m;
}

// Random multi-relation graph input with row-normalized propagation.
GraphInput random_input(std::size_t n, std::size_t attr, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution edge(0.35);
  GraphInput in;
  for (auto& p : in.propagation) {
    p = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (edge(rng)) p(i, j) = p(j, i) = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double deg = 0.0;
      for (double v : p.row(i)) deg += v;
      if (deg > 0.0)
        for (double& v : p.row(i)) v /= deg;
    }
  }
  in.features = random_matrix(n, attr, rng, 0.0, 1.0);
  return in;
}

// Straight loops over the propagation rule, independent of the library's
// matrix helpers.
Matrix forward_oracle(const ModelParams& p, const GraphInput& in) {
  const std::size_t n = in.features.rows();
  auto layer = [&](const Matrix& h, const LayerWeights& w) {
    Matrix out(n, p.dim);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < p.dim; ++k) {
        double z = 0.0;
        for (std::size_t a = 0; a < h.cols(); ++a) z += h(i, a) * w.self(a, k);
        for (std::size_t r = 0; r < kRelationCount; ++r)
          for (std::size_t j = 0; j < n; ++j) {
            if (in.propagation[r](i, j) == 0.0) continue;
            for (std::size_t a = 0; a < h.cols(); ++a) z += in.propagation[r](i, j) * h(j, a) * w.relation[r](a, k);
          }
        out(i, k) = std::max(0.0, z);
      }
    }
    return out;
  };
  const Matrix h1 = layer(in.features, p.layers[0]);
  const Matrix h2 = layer(h1, p.layers[1]);
  Matrix e(n, p.dim);
  for (std::size_t i = 0; i < e.size(); ++i) e.data()[i] = std::max(h1.data()[i], h2.data()[i]);
  return e;
}

double bce_oracle(double f, double y) {
  const double p = 1.0 / (1.0 + std::exp(-f));
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

std::vector<GuiGraph> synth_graphs(std::size_t n, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  std::vector<GuiGraph> out;
  for (const auto& g : gen_accessible(cfg, n)) out.push_back(build_graph(flatten(g.tree)));
  return out;
}

class CountingObserver : public IterationObserver {
 public:
  explicit CountingObserver(int stop_after) : stop_after_(stop_after) {}
  void on_embedding(int node, int iteration, std::span<const double>) override {
    ++calls;
    last_iteration = iteration;
    max_node = std::max(max_node, node);
  }
  bool all_converged() const override { return stop_after_ > 0 && last_iteration + 1 >= stop_after_; }

  int calls = 0;
  int last_iteration = -1;
  int max_node = -1;

 private:
  int stop_after_;
};

}  // namespace

TEST_SUITE("rgcn") {
  TEST_CASE("parameter shapes") {
    const auto p = init_params(1, 1, 3);
    for (const auto& l : p.layers) {
      for (const auto& w : l.relation) CHECK((w.rows() == 1 && w.cols() == 1));
      CHECK((l.self.rows() == 1 && l.self.cols() == 1));
    }
    CHECK(p.relation_vectors.rows() == kRelationCount);
    CHECK(p.parameter_count() == 2 * 4 + 3);
    const auto q = init_params(10, 16, 3);
    CHECK(q.layers[0].self.rows() == 10);
    CHECK(q.layers[1].self.rows() == 16);
    CHECK(q.parameter_count() == 4 * 10 * 16 + 4 * 16 * 16 + 3 * 16);
    CHECK(init_params(10, 16, 3) == q);
    CHECK_FALSE(init_params(10, 16, 4) == q);
    CHECK_THROWS_AS(init_params(0, 4, 1), Error);
  }

  TEST_CASE("zero weights give zero embeddings") {
    const auto in = random_input(6, 10, 1);
    const auto p = init_params(10, 8, 1).zeros_like();
    const Matrix e = forward(p, in);
    CHECK(std::all_of(e.data().begin(), e.data().end(), [](double v) { return v == 0.0; }));
  }

  TEST_CASE("single node with only a self loop") {
    auto p = init_params(1, 1, 1).zeros_like();
    p.layers[0].self(0, 0) = 2.0;
    p.layers[1].self(0, 0) = 3.0;
    GraphInput in;
    for (auto& a : in.propagation) a = Matrix(1, 1);
    in.features = Matrix(1, 1, 0.5);
    // h1 = 1, h2 = 3, max = 3.
    CHECK(forward(p, in)(0, 0) == doctest::Approx(3.0));
    p.layers[1].self(0, 0) = -3.0;
    CHECK(forward(p, in)(0, 0) == doctest::Approx(1.0));
  }

  TEST_CASE("hand-built three node path") {
    // 0 -CC- 1 -CV- 2, two attributes, d = 2.
    GraphInput in;
    for (auto& a : in.propagation) a = Matrix(3, 3);
    in.propagation[0](0, 1) = in.propagation[0](1, 0) = 1.0;
    in.propagation[1](1, 2) = in.propagation[1](2, 1) = 1.0;
    in.features = Matrix(3, 2);
    in.features(0, 0) = 1.0;
    in.features(1, 1) = 1.0;
    in.features(2, 0) = 0.5;
    in.features(2, 1) = 0.5;
    auto p = init_params(2, 2, 9);
    const Matrix e = forward(p, in);
    const Matrix o = forward_oracle(p, in);
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(e.data()[i] == doctest::Approx(o.data()[i]).epsilon(1e-12));
  }

  TEST_CASE("forward matches the loop oracle on random graphs") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto in = random_input(3 + seed % 9, 10, seed);
      const auto p = init_params(10, 8, seed + 100);
      const Matrix e = forward(p, in);
      const Matrix o = forward_oracle(p, in);
      for (std::size_t i = 0; i < e.size(); ++i) REQUIRE(e.data()[i] == doctest::Approx(o.data()[i]).epsilon(1e-10));
    }
  }

  TEST_CASE("distmult score example and symmetry") {
    auto p = init_params(1, 2, 1);
    p.relation_vectors(0, 0) = 0.5;
    p.relation_vectors(0, 1) = 1.0;
    Matrix e(2, 2);
    e(0, 0) = 1;
    e(0, 1) = 2;
    e(1, 0) = 3;
    e(1, 1) = 4;
    CHECK(score(p, e, 0, Relation::CC, 1) == doctest::Approx(9.5));
    CHECK(score(p, e, 1, Relation::CC, 0) == score(p, e, 0, Relation::CC, 1));
  }

  TEST_CASE("zero parameters give loss ln 2") {
    const auto in = random_input(5, 10, 2);
    const auto p = init_params(10, 4, 1).zeros_like();
    const std::vector<Triple> pos{{0, Relation::CC, 1, 1.0}, {2, Relation::CV, 3, 1.0}};
    const std::vector<Triple> neg{{0, Relation::CC, 4, 0.0}, {1, Relation::VV, 2, 0.0}};
    CHECK(loss(p, in, pos, neg) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  TEST_CASE("loss of given scores") {
    const std::vector<double> s{2, -1, 0, 3}, y{1, 0, 1, 0};
    double expected = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) expected += bce_oracle(s[t], y[t]);
    expected /= 4.0;
    CHECK(loss_from_scores(s, y) == doctest::Approx(expected).epsilon(1e-12));
    // A confident wrong score is clamped rather than infinite.
    const std::vector<double> big{1000.0}, zero{0.0};
    CHECK(loss_from_scores(big, zero) == doctest::Approx(-std::log(1e-12)));
    CHECK_THROWS_AS(loss_from_scores({}, {}), Error);
  }

  TEST_CASE("analytic gradient matches central differences") {
    const double h = 1e-5;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto in = random_input(10, 4, seed);
      auto p = init_params(4, 5, seed + 7);
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> node(0, 9);
      std::vector<Triple> triples;
      for (int t = 0; t < 12; ++t) {
        int a = node(rng), b = node(rng);
        if (a == b) b = (b + 1) % 10;
        triples.push_back({a, kRelations[t % 3], b, t % 2 == 0 ? 1.0 : 0.0});
      }
      auto grad = p.zeros_like();
      loss_and_gradient(p, in, triples, grad);
      auto objective = [&](const ModelParams& q) {
        const Matrix e = forward_oracle(q, in);
        double total = 0.0;
        for (const auto& t : triples) total += bce_oracle(score(q, e, t.s, t.r, t.o), t.y);
        return total / static_cast<double>(triples.size());
      };
      double diff2 = 0.0, an2 = 0.0, nu2 = 0.0;
      auto tensors = p.tensors();
      auto gts = grad.tensors();
      for (std::size_t k = 0; k < tensors.size(); ++k) {
        for (std::size_t i = 0; i < tensors[k]->size(); ++i) {
          double& w = tensors[k]->data()[i];
          const double orig = w;
          w = orig + h;
          const double up = objective(p);
          w = orig - h;
          const double down = objective(p);
          w = orig;
          const double numeric = (up - down) / (2 * h);
          const double analytic = gts[k]->data()[i];
          diff2 += (analytic - numeric) * (analytic - numeric);
          an2 += analytic * analytic;
          nu2 += numeric * numeric;
        }
      }
      const double rel = std::sqrt(diff2) / std::max({std::sqrt(an2), std::sqrt(nu2), 1e-300});
      CAPTURE(seed);
      CHECK(rel <= 1e-4);
    }
  }

  TEST_CASE("embeddings are equivariant under node permutation") {
    const std::size_t n = 8;
    const auto in = random_input(n, 10, 3);
    const auto p = init_params(10, 6, 3);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(11));
    GraphInput q;
    for (std::size_t r = 0; r < kRelationCount; ++r) {
      q.propagation[r] = Matrix(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) q.propagation[r](i, j) = in.propagation[r](perm[i], perm[j]);
    }
    q.features = Matrix(n, 10);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < 10; ++a) q.features(i, a) = in.features(perm[i], a);
    const Matrix e = forward(p, in), f = forward(p, q);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < 6; ++k) CHECK(f(i, k) == doctest::Approx(e(perm[i], k)).epsilon(1e-12));
  }

  TEST_CASE("negatives are non-edges with matching kinds") {
    const auto graphs = synth_graphs(10, 4);
    std::mt19937_64 rng(1);
    for (const auto& g : graphs) {
      const auto pos = positive_triples(g);
      const auto neg = sample_negatives(g, pos, 2, rng);
      CHECK(neg.size() <= 2 * pos.size());
      for (const auto& t : neg) {
        CHECK(t.y == 0.0);
        CHECK_FALSE(g.has_edge(t.s, t.o));
        CHECK(kinds_match(g, t.s, t.o, t.r));
      }
    }
  }

  TEST_CASE("training lowers the loss and is deterministic") {
    const auto graphs = synth_graphs(20, 2);
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.dim = 8;
    int calls = 0;
    const auto m = train(graphs, cfg, [&](int, double) { ++calls; });
    REQUIRE(m.loss_curve.size() >= 2);
    CHECK(calls == static_cast<int>(m.loss_curve.size()));
    CHECK(m.loss_curve.back() < m.loss_curve.front());
    CHECK(m.params.all_finite());
    CHECK(train(graphs, cfg) == m);
    CHECK_THROWS_AS(train(std::span<const GuiGraph>{}, cfg), Error);
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(train(graphs, cfg), Error);
  }

  TEST_CASE("prediction reports every node each iteration") {
    const auto graphs = synth_graphs(1, 8);
    TrainConfig cfg;
    cfg.epochs = 5;
    const auto m = train(graphs, cfg);
    const auto removal = remove_random_edges(graphs[0], 2, 1);
    PredictOptions opts;
    opts.max_iterations = 7;
    CountingObserver never(0);
    const auto pred = predict_links(m, removal.graph, removal.removed, never, opts);
    CHECK(pred.iterations == 7);
    CHECK_FALSE(pred.converged);
    CHECK(never.calls == 7 * static_cast<int>(graphs[0].size()));
    CHECK(never.max_node == static_cast<int>(graphs[0].size()) - 1);
    CHECK(std::is_sorted(pred.ranked.begin(), pred.ranked.end(),
                         [](const ScoredEdge& a, const ScoredEdge& b) { return a.score > b.score; }));
    const auto flagged = std::count_if(pred.ranked.begin(), pred.ranked.end(), [](const auto& s) { return s.removed; });
    CHECK(static_cast<std::size_t>(flagged) == removal.removed.size());

    CountingObserver at_once(1);
    const auto quick = predict_links(m, removal.graph, removal.removed, at_once, opts);
    CHECK(quick.iterations == 1);
    CHECK(quick.converged);
  }

  TEST_CASE("link evaluation counts one query per removed edge") {
    const auto graphs = synth_graphs(10, 5);
    const auto p = init_params(AttributeVector::kSize, 8, 1);
    const auto ev = evaluate_link_prediction(p, graphs, 2, 3);
    std::size_t expected = 0;
    for (const auto& g : graphs) expected += std::min<std::size_t>(2, g.edges.size());
    CHECK(ev.queries == expected);
    CHECK(ev.model_mrr > 0.0);
    CHECK(ev.model_mrr <= 1.0);
    CHECK(ev.random_mrr > 0.0);
    CHECK(ev.random_mrr <= 1.0);
  }

  TEST_CASE("model file round trip") {
    const auto graphs = synth_graphs(5, 6);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.dim = 4;
    const auto m = train(graphs, cfg);
    CHECK(parse_model(serialize_model(m)) == m);
    CHECK_THROWS_AS(parse_model("not a model"), ParseError);
  }
}
