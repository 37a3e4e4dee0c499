#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "diamsketch/afn_sketch.hpp"
#include "diamsketch/diam_sketch.hpp"
#include "diamsketch/hashing.hpp"
#include "diamsketch/l0_sampler.hpp"
#include "diamsketch/linf_embedding.hpp"
#include "diamsketch/metric.hpp"
#include "diamsketch/rng.hpp"

using namespace diamsketch;

namespace {

constexpr std::uint64_t kBound = std::uint64_t{1} << 20;

std::shared_ptr<const PointUniverse> cube(std::size_t n, std::size_t k) {
  CounterRng rng(1);
  std::vector<double> c(n * k);
  for (auto& v : c) v = rng.uniform01() * 100;
  return std::make_shared<const PointUniverse>(n, k, std::move(c));
}

void BM_PairwiseHash(benchmark::State& state) {
  const PairwiseHash h(7, std::uint64_t{1} << 20, 10);
  std::int64_t key = 0;
  for (auto _ : state) benchmark::DoNotOptimize(h(key++ & 0xfffff));
}
BENCHMARK(BM_PairwiseHash);

void BM_L0Update(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  L0Sampler s(n, 0.05, kBound, 3);
  std::size_t i = 0;
  for (auto _ : state) {
    s.update(i, 1);
    i = (i + 7919) % n;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_L0Update)->Arg(1 << 10)->Arg(1 << 16)->Arg(1 << 20);

void BM_L0Sample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  L0Sampler s(n, 0.05, kBound, 3);
  for (std::size_t i = 0; i < n; i += 3) s.update(i, 1);
  for (auto _ : state) benchmark::DoNotOptimize(s.sample());
}
BENCHMARK(BM_L0Sample)->Arg(1 << 10)->Arg(1 << 16);

void BM_AfnUpdate(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto u = cube(1000, k);
  AfnSketch s(u, AfnParams{.r = 10.0, .epsilon = 0.5, .delta = 0.05, .seed = 5});
  std::size_t i = 0;
  for (auto _ : state) {
    s.update(i, 1);
    i = (i + 17) % 1000;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_AfnUpdate)->Arg(5)->Arg(20);

void BM_AfnQuery(benchmark::State& state) {
  const auto u = cube(1000, 5);
  AfnSketch s(u, AfnParams{.r = 10.0, .epsilon = 0.5, .delta = 0.05, .seed = 5});
  for (std::size_t i = 0; i < 1000; i += 11) s.update(i, 1);
  for (auto _ : state) benchmark::DoNotOptimize(s.query_point(0));
}
BENCHMARK(BM_AfnQuery);

void BM_EmbeddingBuild(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = FiniteMetric::from_graph(gen_connected_graph(n, 0.02, 9));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(LinfEmbedding::build(m, 2, seed++).dimension());
}
BENCHMARK(BM_EmbeddingBuild)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_EstimatorUpdate(benchmark::State& state) {
  const auto m = FiniteMetric::from_graph(gen_connected_graph(64, 0.03, 11));
  EstimatorConfig cfg;
  const auto ctx = EstimatorContext::build(m, cfg);
  auto sk = ctx.make_sketch(0);
  std::size_t i = 0;
  for (auto _ : state) {
    sk.update(i, 1);
    i = (i + 5) % 64;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EstimatorUpdate);

}  // namespace
BENCHMARK_MAIN();
