#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "harness.hpp"

using namespace diamsketch;
using namespace diamsketch::harness;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.instance.n = 32;
  c.instance.extra_p = 0.05;
  c.sketch.c_values = {10.0, 14.0};
  c.trials = 3;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = small_config();
  c.instance.generator = "bipartite";
  c.instance.p = 0.07;
  c.output = "out.csv";
  const nlohmann::json j = c;
  const auto back = j.get<ExperimentConfig>();
  EXPECT_EQ(nlohmann::json(back).dump(), j.dump());
  EXPECT_EQ(back.instance.p, std::optional<double>(0.07));

  c.instance.p.reset();
  const nlohmann::json ja = c;
  EXPECT_EQ(ja["instance"]["p"], "auto");
  EXPECT_FALSE(ja.get<ExperimentConfig>().instance.p.has_value());
}

TEST(Config, MissingFieldsTakeDefaults) {
  const auto c = nlohmann::json::parse(R"({"trials": 7})").get<ExperimentConfig>();
  EXPECT_EQ(c.trials, 7u);
  EXPECT_EQ(c.command, "tradeoff");
  EXPECT_EQ(c.instance.n, 128u);
}

TEST(Run, DeterministicAcrossRerunsAndThreads) {
  ExperimentConfig c = small_config();
  std::stringstream a, b, d;
  ASSERT_EQ(run(c, a), 0);
  ASSERT_EQ(run(c, b), 0);
  c.threads = 3;
  ASSERT_EQ(run(c, d), 0);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(), d.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "c,q,epsilon,dimension,grid,rows,bytes,trials,success_rate");
}

TEST(Run, UnknownCommand) {
  ExperimentConfig c = small_config();
  c.command = "nope";
  std::stringstream out;
  EXPECT_THROW(run(c, out), std::invalid_argument);
}

TEST(Trial, OutcomeIsConsistent) {
  const ExperimentConfig c = small_config();
  const auto o = run_estimate_trial(c, 10.0, 1);
  EXPECT_GE(o.support, 2u);
  EXPECT_LE(o.support, 16u);
  EXPECT_EQ(o.success, o.diameter / 10.0 < o.eta && o.eta <= o.diameter);
  EXPECT_GT(o.bytes, 0u);
  const auto again = run_estimate_trial(c, 10.0, 1);
  EXPECT_EQ(again.eta, o.eta);
  EXPECT_EQ(again.bytes, o.bytes);
}

TEST(Seed, EnvironmentOverride) {
  ::unsetenv(kSeedEnv);
  EXPECT_EQ(resolve_seed(4), 4u);
  ::setenv(kSeedEnv, "123", 1);
  EXPECT_EQ(resolve_seed(4), 123u);
  ::setenv(kSeedEnv, "12x", 1);
  EXPECT_THROW(resolve_seed(4), std::invalid_argument);
  ::unsetenv(kSeedEnv);
}

TEST(ParallelFor, CoversAllAndPropagates) {
  std::vector<int> hit(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { ++hit[i]; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 5) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Instance, Generators) {
  InstanceSpec s;
  s.n = 20;
  EXPECT_EQ(make_instance(s, 1).size(), 20u);
  s.generator = "bipartite";
  EXPECT_EQ(make_instance(s, 1).size(), 40u);
  s.generator = "bogus";
  EXPECT_THROW(make_instance(s, 1), std::invalid_argument);
}

TEST(Instance, FileFormatDetectedFromContent) {
  const auto g = gen_bipartite(10, 0.3, 2);
  const auto m = FiniteMetric::from_graph(gen_connected_graph(12, 0.1, 3));
  {
    std::ofstream a("harness_graph.txt"), b("harness_metric.txt");
    write_graph_file(a, g);
    write_metric_csv(b, m);
  }
  EXPECT_EQ(load_metric_file("harness_graph.txt").size(), 20u);
  const auto back = load_metric_file("harness_metric.txt");
  ASSERT_EQ(back.size(), 12u);
  EXPECT_EQ(back.distance(0, 11), m.distance(0, 11));
  InstanceSpec s;
  s.generator = "file";
  s.path = "harness_metric.txt";
  EXPECT_EQ(make_instance(s, 0).size(), 12u);
  EXPECT_THROW(load_metric_file("does_not_exist.txt"), std::runtime_error);
}
