#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "diamsketch/l0_sampler.hpp"
#include "diamsketch/rng.hpp"
#include "diamsketch/serialization.hpp"

using namespace diamsketch;

namespace {

constexpr std::uint64_t kBound = std::uint64_t{1} << 31;

struct Update {
  std::size_t i;
  std::int64_t d;
};

std::vector<Update> random_stream(std::size_t n, std::size_t len, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<Update> s;
  for (std::size_t t = 0; t < len; ++t)
    s.push_back({static_cast<std::size_t>(rng.uniform_below(n)), rng.uniform_int(-3, 3)});
  return s;
}

void feed(L0Sampler& sk, const std::vector<Update>& s) {
  for (auto u : s) sk.update(u.i, u.d);
}

// Reference mulmod for the fingerprint rows.
std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

}  // namespace

TEST(L0Sampler, FreshIsZero) {
  const L0Sampler sk(1000, 0.1, kBound, 3);
  EXPECT_EQ(sk.sample().status, SampleStatus::kZero);
  EXPECT_TRUE(sk.is_empty_state());
}

TEST(L0Sampler, Shape) {
  const L0Sampler sk(1024, 0.1, kBound, 3);
  EXPECT_EQ(sk.levels(), 11u);
  EXPECT_EQ(sk.repetitions(), 4u);
  EXPECT_EQ(sk.row_count(), 3u * 11 * 4);
  for (std::size_t n : {2u, 17u, 1000u, 40000u})
    for (double d : {0.5, 0.1, 0.01, 1e-4}) {
      const L0Sampler s(n, d, kBound, 1);
      EXPECT_LE(static_cast<double>(s.row_count()), L0Sampler::row_bound(n, d));
      EXPECT_LE(8.0 * static_cast<double>(s.serialized_size()), L0Sampler::space_bound_bits(n, d, kBound));
    }
}

TEST(L0Sampler, RejectsBadParameters) {
  EXPECT_THROW(L0Sampler(100, 0.0, kBound, 1), std::invalid_argument);
  EXPECT_THROW(L0Sampler(100, 1.0, kBound, 1), std::invalid_argument);
  EXPECT_THROW(L0Sampler(0, 0.1, kBound, 1), std::invalid_argument);
  L0Sampler sk(100, 0.1, kBound, 1);
  EXPECT_THROW(sk.update(100, 1), std::out_of_range);
}

TEST(L0Sampler, SameSeedSameBytes) {
  L0Sampler a(500, 0.05, kBound, 9), b(500, 0.05, kBound, 9);
  EXPECT_EQ(a.serialize(), b.serialize());
  const auto s = random_stream(500, 300, 4);
  feed(a, s);
  feed(b, s);
  EXPECT_EQ(a.serialize(), b.serialize());
}

TEST(L0Sampler, InsertDeleteRestoresFresh) {
  L0Sampler sk(300, 0.1, kBound, 5);
  const L0Sampler fresh = sk;
  sk.update(17, 1);
  sk.update(17, -1);
  EXPECT_EQ(sk, fresh);
  EXPECT_EQ(sk.counters(), fresh.counters());
  EXPECT_EQ(sk.sample().status, SampleStatus::kZero);
}

TEST(L0Sampler, DoubleIncrementEqualsTwo) {
  L0Sampler a(300, 0.1, kBound, 5), b(300, 0.1, kBound, 5);
  a.update(42, 2);
  b.update(42, 1);
  b.update(42, 1);
  EXPECT_EQ(a.serialize(), b.serialize());
}

TEST(L0Sampler, StateIsMatrixTimesVector) {
  const std::size_t n = 256;
  L0Sampler sk(n, 0.05, kBound, 77);
  std::vector<std::int64_t> x(n, 0);
  for (auto u : random_stream(n, 10000, 8)) {
    sk.update(u.i, u.d);
    x[u.i] += u.d;
  }
  const auto m = sk.export_matrix();
  const auto c = sk.counters();
  ASSERT_EQ(m.rows, c.size());
  ASSERT_EQ(m.cols, n);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const std::uint64_t mod = m.modulus[r];
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t coef = m.coefficients[r * n + i];
      if (mod == 0) {
        acc += coef * static_cast<std::uint64_t>(x[i]);
      } else {
        const std::int64_t xi = x[i] % static_cast<std::int64_t>(mod);
        const std::uint64_t xr = xi < 0 ? static_cast<std::uint64_t>(xi + static_cast<std::int64_t>(mod))
                                        : static_cast<std::uint64_t>(xi);
        acc = (acc + mulmod(coef, xr, mod)) % mod;
      }
    }
    ASSERT_EQ(acc, c[r]) << "row " << r;
  }
}

TEST(L0Sampler, LinearityUnderMerge) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto s1 = random_stream(400, 60, 100 + s), s2 = random_stream(400, 60, 200 + s);
    L0Sampler whole(400, 0.1, kBound, s), a(400, 0.1, kBound, s), b(400, 0.1, kBound, s);
    feed(whole, s1);
    feed(whole, s2);
    feed(a, s1);
    feed(b, s2);
    a.merge(b);
    ASSERT_EQ(a.serialize(), whole.serialize());
  }
}

TEST(L0Sampler, MergeRejectsMismatch) {
  L0Sampler a(100, 0.1, kBound, 1);
  EXPECT_THROW(a.merge(L0Sampler(100, 0.1, kBound, 2)), SketchMismatch);
  EXPECT_THROW(a.merge(L0Sampler(101, 0.1, kBound, 1)), SketchMismatch);
  EXPECT_THROW(a.merge(L0Sampler(100, 0.2, kBound, 1)), SketchMismatch);
}

TEST(L0Sampler, SingletonSupport) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    L0Sampler sk(64, 0.1, kBound, s);
    sk.update(3, 5);
    const auto r = sk.sample();
    ASSERT_NE(r.status, SampleStatus::kZero);
    if (r.status == SampleStatus::kIndex) ASSERT_EQ(r.index, 3u);
  }
}

TEST(L0Sampler, SamplesStayInSupportUnderChurn) {
  const std::size_t n = 2000;
  std::size_t fails = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    L0Sampler sk(n, 0.1, kBound, derive_seed(s, 1));
    CounterRng rng(s);
    std::set<std::size_t> support;
    for (int j = 0; j < 30; ++j) {
      const std::size_t i = rng.uniform_below(n);
      const std::int64_t v = rng.uniform_int(-5, 5);
      if (v == 0) continue;
      sk.update(i, v);
      if (support.count(i)) {
        sk.update(i, -v);  // cancel again
      } else {
        support.insert(i);
      }
    }
    // Noise that cancels: insert then delete many others.
    for (int j = 0; j < 100; ++j) {
      const std::size_t i = rng.uniform_below(n);
      sk.update(i, 7);
      sk.update(i, -7);
    }
    const auto r = sk.sample();
    if (r.status == SampleStatus::kFail) {
      ++fails;
      continue;
    }
    ASSERT_EQ(r.status, SampleStatus::kIndex);
    ASSERT_TRUE(support.count(r.index)) << r.index;
  }
  EXPECT_LE(fails, 50u);
}

TEST(L0Sampler, NegativeEntriesCountAsSupport) {
  L0Sampler sk(50, 0.01, kBound, 12);
  sk.update(9, -4);
  const auto r = sk.sample();
  ASSERT_EQ(r.status, SampleStatus::kIndex);
  EXPECT_EQ(r.index, 9u);
}

TEST(L0Sampler, SerializationRoundTrip) {
  L0Sampler sk(777, 0.03, kBound, 21);
  const auto empty = sk.serialize();
  EXPECT_EQ(empty.size(), sk.serialized_size());
  EXPECT_EQ(L0Sampler::deserialize(empty), sk);
  feed(sk, random_stream(777, 500, 3));
  const auto bytes = sk.serialize();
  EXPECT_EQ(bytes.size(), sk.serialized_size());
  const L0Sampler back = L0Sampler::deserialize(bytes);
  EXPECT_EQ(back, sk);
  EXPECT_EQ(back.serialize(), bytes);
  EXPECT_EQ(back.sample().status, sk.sample().status);
  EXPECT_EQ(back.sample().index, sk.sample().index);
}

TEST(L0Sampler, DeserializeRejectsGarbage) {
  L0Sampler sk(100, 0.1, kBound, 2);
  auto bytes = sk.serialize();
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(L0Sampler::deserialize(truncated), SerializationError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(L0Sampler::deserialize(bad_magic), SerializationError);
  bytes.push_back(0);
  EXPECT_THROW(L0Sampler::deserialize(bytes), SerializationError);
}

TEST(L0Sampler, LevelsAreGeometric) {
  const L0Sampler sk(1 << 16, 0.1, 1024, 8);
  std::vector<std::size_t> at_least(sk.levels(), 0);
  const std::size_t n = 1 << 16;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= sk.level_of(0, i); ++j) ++at_least[j];
  for (std::size_t j = 0; j < 8; ++j) {
    const double expected = static_cast<double>(n) / std::pow(2.0, static_cast<double>(j));
    EXPECT_NEAR(static_cast<double>(at_least[j]), expected, 5 * std::sqrt(expected)) << j;
  }
}
