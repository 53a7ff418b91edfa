#include <random>

#include <benchmark/benchmark.h>

#include "guifix/calibrate.hpp"
#include "guifix/detect.hpp"
#include "guifix/fix.hpp"
#include "guifix/graph.hpp"
#include "guifix/rgcn.hpp"
#include "guifix/spectral.hpp"
#include "guifix/synth.hpp"

using namespace guifix;

namespace {

std::vector<SyntheticGui> corpus(std::size_t n) {
  SynthConfig cfg;
  cfg.seed = 7;
  return gen_accessible(cfg, n);
}

void BM_Dft(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> f(static_cast<std::size_t>(state.range(0)));
  for (double& v : f) v = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(dft(f));
}
BENCHMARK(BM_Dft)->Arg(10)->Arg(64)->Arg(500);

void BM_BuildGraph(benchmark::State& state) {
  const auto guis = corpus(32);
  std::vector<Wireframe> wfs;
  for (const auto& g : guis) wfs.push_back(flatten(g.tree));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(build_graph(wfs[i++ % wfs.size()]));
}
BENCHMARK(BM_BuildGraph);

void BM_Detect(benchmark::State& state) {
  const auto guis = corpus(32);
  std::vector<Wireframe> wfs;
  for (const auto& g : guis) wfs.push_back(flatten(g.tree));
  const Thresholds th;
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(detect_issues(wfs[i++ % wfs.size()], th));
}
BENCHMARK(BM_Detect);

void BM_Forward(benchmark::State& state) {
  const auto g = build_graph(flatten(corpus(1)[0].tree));
  const auto p = init_params(AttributeVector::kSize, static_cast<std::size_t>(state.range(0)), 1);
  const auto in = prepare_input(g, {});
  for (auto _ : state) benchmark::DoNotOptimize(forward(p, in));
}
BENCHMARK(BM_Forward)->Arg(16)->Arg(32);

void BM_PlanFix(benchmark::State& state) {
  const auto guis = corpus(20);
  std::vector<GuiGraph> graphs;
  for (const auto& g : guis) graphs.push_back(build_graph(flatten(g.tree)));
  TrainConfig cfg;
  cfg.epochs = 50;
  const auto model = train(graphs, cfg);
  InjectionMix mix;
  mix.p_size = mix.p_interval = mix.p_contrast = 0.3;
  const Thresholds th;
  const auto inj = inject_issues(guis[0].tree, mix, 3, th);
  const auto wf = flatten(inj.tree);
  const auto issues = detect_issues(wf, th);
  FixOptions opts;
  opts.predict.learning_rate = cfg.learning_rate / 10;
  const auto cal = published_calibration();
  for (auto _ : state) benchmark::DoNotOptimize(plan_fix(wf, issues, model, cal, th, opts, &inj.tree));
}
BENCHMARK(BM_PlanFix)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
