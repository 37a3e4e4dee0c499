#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace diamsketch {

enum class SampleStatus { kIndex, kZero, kFail };

struct SampleResult {
  SampleStatus status = SampleStatus::kFail;
  std::size_t index = 0;  // meaningful only for kIndex

  static SampleResult zero() { return {SampleStatus::kZero, 0}; }
  static SampleResult fail() { return {SampleStatus::kFail, 0}; }
  static SampleResult at(std::size_t i) { return {SampleStatus::kIndex, i}; }
};

class SketchMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Linear l0-sampling sketch over Z^n.
///
/// Each of R repetitions subsamples the universe geometrically: index i sits
/// in levels 0..lv(i) where Pr[lv(i) >= j] = 2^-j, for L = ceil(log2 n) + 1
/// levels. Every (repetition, level) pair holds a one-sparse tester with three
/// linear counters: sum x_i and sum i x_i (both mod 2^64), and the fingerprint
/// sum x_i z^(i+1) over GF(2^61 - 1). A tester holding a single nonzero
/// coordinate reveals it; the fingerprint rejects the rest except with
/// probability <= n / (2^61 - 1).
///
/// sample() scans (level, repetition) in ascending order and returns the first
/// recovered index. With R = ceil(log2(1/delta)) and per-repetition failure at
/// most 1/2 the sampler fails with probability at most delta.
///
/// Counter storage is allocated on the first update; an untouched sampler
/// costs a few words.
class L0Sampler {
 public:
  static constexpr std::uint64_t kFieldPrime = (std::uint64_t{1} << 61) - 1;
  static constexpr std::uint64_t kDeltaDenominator = 1'000'000'000;
  static constexpr std::size_t kCountersPerTester = 3;
  static constexpr std::size_t kHeaderBytes = 4 + 8 * 5 + 4 * 2;

  L0Sampler(std::size_t n, double delta, std::uint64_t magnitude_bound, std::uint64_t seed);

  void update(std::size_t i, std::int64_t delta);
  /// Componentwise sum; throws SketchMismatch unless (n, delta, bound, seed) agree.
  void merge(const L0Sampler& other);
  SampleResult sample() const;

  std::size_t universe() const noexcept { return n_; }
  std::size_t levels() const noexcept { return levels_; }
  std::size_t repetitions() const noexcept { return reps_; }
  std::size_t row_count() const noexcept { return kCountersPerTester * levels_ * reps_; }
  double delta() const noexcept;
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t magnitude_bound() const noexcept { return magnitude_bound_; }

  /// Deepest level containing index i in repetition rep.
  std::size_t level_of(std::size_t rep, std::size_t i) const noexcept;
  bool is_empty_state() const noexcept;

  std::size_t serialized_size() const noexcept { return kHeaderBytes + 8 * row_count(); }
  std::vector<std::uint8_t> serialize() const;
  static L0Sampler deserialize(std::span<const std::uint8_t> bytes);

  /// Flat counter state in serialization order: for rep, for level:
  /// (count, index_sum, fingerprint).
  std::vector<std::uint64_t> counters() const;

  /// Explicit sketch matrix: row r applied to x, reduced mod `modulus[r]`
  /// (0 means mod 2^64), reproduces counters()[r].
  struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint64_t> coefficients;  // row-major rows x cols
    std::vector<std::uint64_t> modulus;
  };
  Matrix export_matrix() const;

  /// Rows per sampler are bounded by kRowConstant (log2 n + 1)(log2(1/delta) + 1).
  static constexpr double kRowConstant = 6.0;
  static double row_bound(std::size_t n, double delta);
  /// Serialized bits are bounded by kSpaceConstant (log2 n + 1)(log2(1/delta) + 1)(log2(n m) + 1)
  /// whenever n m >= 2^20 (counters are 64-bit words).
  static constexpr double kSpaceConstant = 48.0;
  static double space_bound_bits(std::size_t n, double delta, std::uint64_t magnitude_bound);

  static std::size_t levels_for(std::size_t n) noexcept;
  static std::size_t repetitions_for(double delta);

  friend bool operator==(const L0Sampler& a, const L0Sampler& b);

 private:
  struct Tester {
    std::uint64_t count = 0;
    std::uint64_t index_sum = 0;
    std::uint64_t fingerprint = 0;
  };

  void ensure_storage();
  bool same_shape(const L0Sampler& other) const noexcept;
  bool recover(std::size_t rep, std::size_t level, std::size_t& index) const;
  std::uint64_t fingerprint_base(std::size_t rep) const noexcept { return bases_[rep]; }

  std::size_t n_;
  std::uint64_t delta_num_;
  std::uint64_t magnitude_bound_;
  std::uint64_t seed_;
  std::size_t levels_;
  std::size_t reps_;
  std::vector<std::uint64_t> level_keys_;  // per repetition
  std::vector<std::uint64_t> bases_;       // per repetition, in [1, p)
  std::vector<Tester> testers_;            // reps x levels, empty until touched
};

}  // namespace diamsketch
