#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "diamsketch/diam_sketch.hpp"
#include "diamsketch/rng.hpp"
#include "diamsketch/stream_io.hpp"

using namespace diamsketch;

namespace {

std::shared_ptr<const PointUniverse> cube_points(std::size_t n, std::size_t k, double side, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> c(n * k);
  for (auto& v : c) v = rng.uniform01() * side;
  return std::make_shared<const PointUniverse>(n, k, std::move(c));
}

FiniteMetric connected_metric(std::size_t n, double extra, std::uint64_t seed) {
  return FiniteMetric::from_graph(gen_connected_graph(n, extra, seed));
}

}  // namespace

TEST(DiamDecision, EmptyIsClose) {
  const auto u = cube_points(50, 3, 10.0, 1);
  const DiamDecisionSketch sk(u, 2.0, 0.5, 0.1, 3);
  const auto d = sk.decide();
  EXPECT_FALSE(d.far);
  EXPECT_FALSE(d.sampler_failed);
  EXPECT_FALSE(d.query.has_value());
}

TEST(DiamDecision, WitnessCertifiesDistance) {
  const auto u = cube_points(200, 4, 20.0, 2);
  for (std::uint64_t s = 0; s < 20; ++s) {
    DiamDecisionSketch sk(u, 6.0, 0.5, 0.1, s);
    std::vector<std::size_t> support;
    for (std::size_t i = s; i < 200; i += 9) {
      sk.update(i, 1);
      support.push_back(i);
    }
    const auto d = sk.decide();
    if (!d.far) continue;
    ASSERT_TRUE(d.query && d.witness);
    EXPECT_GT(u->linf(*d.query, d.witness->index), 6.0);
    EXPECT_EQ((*d.query - s) % 9, 0u);
    EXPECT_EQ((d.witness->index - s) % 9, 0u);
  }
}

TEST(DiamDecision, MergeLinearityAndSerialization) {
  const auto u = cube_points(60, 2, 10.0, 5);
  DiamDecisionSketch whole(u, 2.0, 0.5, 0.2, 8), a(u, 2.0, 0.5, 0.2, 8), b(u, 2.0, 0.5, 0.2, 8);
  for (std::size_t i = 0; i < 60; ++i) {
    whole.update(i, 1);
    (i % 3 ? a : b).update(i, 1);
  }
  a.merge(b);
  EXPECT_EQ(a, whole);
  const auto bytes = whole.serialize();
  EXPECT_EQ(bytes.size(), whole.serialized_size());
  EXPECT_EQ(a.serialize(), bytes);
}

TEST(EstimatorPlan, WorkedValues) {
  const auto p10 = EstimatorPlan::make(10, 0.1, 1, 100);
  EXPECT_EQ(p10.q, 2u);
  EXPECT_EQ(p10.t, 4u);
  EXPECT_DOUBLE_EQ(p10.epsilon, 0.25);
  EXPECT_DOUBLE_EQ(p10.stretch, 7.5);
  EXPECT_NEAR(p10.ratio, 4.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(p10.distortion(), 3.0);
  EXPECT_EQ(EstimatorPlan::make(14, 0.1, 1, 100).t, 6u);
  EXPECT_EQ(EstimatorPlan::make(18, 0.1, 1, 100).t, 8u);
  EXPECT_EQ(EstimatorPlan::make(18, 0.1, 1, 100).q, 4u);
}

TEST(EstimatorPlan, InvariantsOverRange) {
  for (double c = 10.0; c <= 40.0; c += 0.25) {
    const auto p = EstimatorPlan::make(c, 0.1, 1, 1000);
    EXPECT_EQ(p.q, static_cast<unsigned>(std::floor((c - 2) / 4)));
    EXPECT_GE(c - 2 * p.epsilon, 4.0 * p.q - 2 - 1e-12);
    EXPECT_LE(2 * (2.0 * p.q - 1) * (1 + p.epsilon), c);
    EXPECT_GE(p.ratio, 1 + p.epsilon - 1e-12);
    // consecutive thresholds differ by exactly the ratio
    for (std::size_t t = 1; t < p.thresholds.size(); ++t)
      EXPECT_NEAR(p.thresholds[t] / p.thresholds[t - 1], p.ratio, 1e-9);
    EXPECT_LT(p.thresholds.back(), 1000.0);
    EXPECT_GE(p.thresholds.back() * p.ratio, 1000.0);
  }
}

TEST(EstimatorPlan, RejectsSmallC) {
  EXPECT_THROW(EstimatorPlan::make(6.0, 0.1, 1, 10), std::invalid_argument);
  EXPECT_THROW(EstimatorPlan::make(6.5, 0.1, 1, 10), std::invalid_argument);  // q = 1
  EXPECT_THROW(EstimatorPlan::make(9.9, 0.1, 1, 10), std::invalid_argument);
  EXPECT_THROW(EstimatorPlan::make(10, 0.0, 1, 10), std::invalid_argument);
}

TEST(EstimatorPlan, GridSizeBound) {
  for (std::size_t n : {16u, 128u, 1024u})
    for (double c : {10.0, 14.0, 18.0}) {
      const auto p = EstimatorPlan::make(c, 0.1, 1, 1);
      const double aspect = static_cast<double>(n) * static_cast<double>(n);
      const double bound = std::ceil(std::log(p.distortion() * aspect) / std::log(1 + p.epsilon)) + 1;
      EXPECT_LE(static_cast<double>(EstimatorPlan::grid_size(c, aspect)), bound);
    }
}

TEST(DiamEstimator, SinglePointGivesZero) {
  const auto m = connected_metric(40, 0.05, 2);
  DiamEstimator est(m, EstimatorConfig{.c = 10, .seed = 3});
  est.update(7, 1);
  EXPECT_EQ(est.estimate().eta, 0.0);
}

TEST(DiamEstimator, AdjacentPair) {
  const auto m = connected_metric(64, 0.03, 4);
  const auto ctx = std::make_shared<const EstimatorContext>(EstimatorContext::build(m, EstimatorConfig{.c = 10, .seed = 5}));
  int ok = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    // tree edge between vertex 0 and its first neighbor
    std::vector<std::int64_t> x(64, 0);
    x[0] = 1;
    std::size_t nb = 1;
    while (m.distance(0, nb) != 1.0) ++nb;
    x[nb] = 1;
    EstimatorConfig cfg = ctx->config;
    cfg.seed = derive_seed(77, s);
    EstimatorContext c = *ctx;
    c.config = cfg;
    const double eta = estimate_by_replay(c, x).eta;
    ok += eta > 0.1 && eta <= 1.0;
  }
  EXPECT_GE(ok, 18);
}

TEST(DiamEstimator, StreamingMatchesReplay) {
  const auto m = connected_metric(64, 0.04, 9);
  const auto ctx = std::make_shared<const EstimatorContext>(EstimatorContext::build(m, EstimatorConfig{.c = 10, .seed = 11}));
  const FrequencyVector target = random_support_vector(64, 6, 3, 13);
  const auto stream = generate_stream(target, 20, 14);
  DiamEstimator est(ctx);
  for (const auto& u : stream) est.update(u.index, u.delta);
  const auto streamed = est.estimate();
  const auto replayed = estimate_by_replay(*ctx, target.entries());
  const auto early = estimate_by_replay(*ctx, target.entries(), true);
  EXPECT_EQ(streamed.eta, replayed.eta);
  EXPECT_EQ(early.eta, replayed.eta);
  ASSERT_EQ(streamed.decisions.size(), replayed.decisions.size());
  for (std::size_t t = 0; t < streamed.decisions.size(); ++t) {
    EXPECT_EQ(streamed.decisions[t].far, replayed.decisions[t].far);
    EXPECT_EQ(streamed.decisions[t].query, replayed.decisions[t].query);
    EXPECT_EQ(est.sketch(t), [&] {
      auto s = ctx->make_sketch(t);
      for (std::size_t i = 0; i < 64; ++i)
        if (target[i]) s.update(i, target[i]);
      return s;
    }());
  }
}

TEST(DiamEstimator, FarCertifiesMetricDistance) {
  const auto m = connected_metric(64, 0.04, 19);
  const auto ctx = EstimatorContext::build(m, EstimatorConfig{.c = 10, .seed = 21});
  ASSERT_TRUE(ctx.distortion.ok());
  for (std::uint64_t s = 0; s < 10; ++s) {
    const FrequencyVector x = random_support_vector(64, 8, 2, 100 + s);
    for (const auto& d : estimate_by_replay(ctx, x.entries()).decisions) {
      if (!d.far) continue;
      ASSERT_TRUE(d.query && d.witness);
      EXPECT_GT(ctx.embedding->linf(*d.query, d.witness->index), d.embedded);
      EXPECT_GT(m.distance(*d.query, d.witness->index), d.threshold);
      EXPECT_NE(x[*d.query], 0);
      EXPECT_NE(x[d.witness->index], 0);
    }
  }
}

TEST(DiamEstimator, SpaceMatchesSerialization) {
  const auto m = connected_metric(40, 0.05, 2);
  DiamEstimator est(m, EstimatorConfig{.c = 14, .seed = 3});
  for (std::size_t i = 0; i < 40; i += 5) est.update(i, 1);
  const auto space = est.space();
  const auto planned = plan_space(est.context());
  EXPECT_EQ(space.total_bytes, planned.total_bytes);
  EXPECT_EQ(space.total_rows, planned.total_rows);
  std::size_t bytes = 0;
  for (std::size_t t = 0; t < space.grid_size; ++t) {
    const auto b = est.sketch(t).serialize();
    EXPECT_EQ(b.size(), space.entries[t].bytes);
    bytes += b.size();
  }
  EXPECT_EQ(bytes, space.total_bytes);
  EXPECT_EQ(space.grid_size, est.context().plan.thresholds.size());
}

TEST(DiamEstimator, RejectsBadInput) {
  const auto m = connected_metric(20, 0.05, 2);
  EXPECT_THROW(DiamEstimator(m, EstimatorConfig{.c = 6.5}), std::invalid_argument);
  DiamEstimator est(m, EstimatorConfig{.c = 10});
  EXPECT_THROW(est.update(20, 1), std::out_of_range);
  const std::vector<std::int64_t> wrong(19, 0);
  EXPECT_THROW(estimate_by_replay(est.context(), wrong), std::invalid_argument);
}
