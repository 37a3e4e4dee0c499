#include <gtest/gtest.h>

#include <sstream>

#include "diamsketch/metric.hpp"
#include "diamsketch/stream_io.hpp"
#include "oracles.hpp"

using namespace diamsketch;

TEST(StreamIo, ParsesCommentsAndBlanks) {
  std::stringstream in("# header\n+ 3\n\n  - 3\n+ 10\r\n");
  const auto s = read_stream(in);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], (StreamUpdate{3, 1}));
  EXPECT_EQ(s[1], (StreamUpdate{3, -1}));
  EXPECT_EQ(s[2], (StreamUpdate{10, 1}));
}

TEST(StreamIo, MalformedLineReportsLineNumber) {
  for (const char* text : {"+ 1\n+ 2\n* 3\n", "+ 1\n+ 2\n+ x\n", "+ 1\n\n+3\n", "+ 1\n+ 2\n+ 99\n"}) {
    std::stringstream in(text);
    try {
      read_stream(in, 50);
      FAIL() << text;
    } catch (const StreamParseError& e) {
      EXPECT_EQ(e.line(), 3u) << text;
      EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
  }
}

TEST(StreamIo, GeneratedStreamRoundTrips) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto target = random_support_vector(300, 1 + s % 20, 4, s);
    const auto stream = generate_stream(target, 50, s + 1);
    std::stringstream file;
    write_stream(file, stream);
    const auto back = read_stream(file, 300);
    EXPECT_EQ(back, stream);
    EXPECT_EQ(apply_stream(300, back), target);
    // every prefix nonnegative
    std::vector<std::int64_t> run(300, 0);
    for (const auto& u : back) ASSERT_GE(run[u.index] += u.delta, 0);
  }
}

TEST(StreamIo, RandomSupportVector) {
  const auto x = random_support_vector(100, 12, 3, 9);
  EXPECT_EQ(x.support().size(), 12u);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_GE(x[i], 0);
    EXPECT_LE(x[i], 3);
  }
  EXPECT_EQ(random_support_vector(100, 12, 3, 9), x);
}

TEST(StreamIo, WriteRejectsNonUnitUpdates) {
  std::stringstream out;
  const std::vector<StreamUpdate> s{{1, 2}};
  EXPECT_THROW(write_stream(out, s), std::invalid_argument);
}

TEST(StreamIo, ResultsCsv) {
  std::stringstream out;
  const std::vector<TrialRow> rows{{0, "Far", 7, 1.5}, {1, "Close", std::nullopt, 0.25}};
  write_results_csv(out, rows);
  EXPECT_EQ(out.str(), "trial,answer,witness,ms\n0,Far,7,1.5\n1,Close,,0.25\n");
}

TEST(Baseline, Cases) {
  const auto m = FiniteMetric::from_graph(gen_connected_graph(50, 0.05, 3));
  EXPECT_EQ(insertion_only_baseline(m, std::vector<StreamUpdate>{{4, 1}}), 0.0);
  EXPECT_EQ(insertion_only_baseline(m, std::vector<StreamUpdate>{{4, 1}, {9, 1}}), m.distance(4, 9));
  EXPECT_THROW(insertion_only_baseline(m, std::vector<StreamUpdate>{{4, 1}, {4, -1}}), std::invalid_argument);
}

TEST(Baseline, WithinFactorTwo) {
  const auto g = gen_connected_graph(80, 0.03, 5);
  const auto m = FiniteMetric::from_graph(g);
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto target = random_support_vector(80, 2 + s % 10, 2, 100 + s);
    const auto stream = generate_stream(target, 0, s);
    const double b = insertion_only_baseline(m, stream);
    const double d = *diam_oracle(m, target.entries());
    EXPECT_LE(b, d);
    EXPECT_GE(b, d / 2);
  }
}
