#pragma once

#include <cstddef>
#include <cstdint>

namespace diamsketch {

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime(std::uint64_t value) noexcept;
/// Smallest prime strictly greater than `value`.
std::uint64_t next_prime_above(std::uint64_t value);

/// h(x) = ((a x + b) mod P) mod K with a in [1, P), b in [0, P), and P the
/// smallest prime above 2 * domain_bound.
class PairwiseHash {
 public:
  PairwiseHash(std::uint64_t seed, std::uint64_t domain_bound, std::uint64_t range);

  /// Negative keys are reduced into [0, P) first.
  std::uint64_t operator()(std::int64_t key) const noexcept;

  std::uint64_t prime() const noexcept { return prime_; }
  std::uint64_t multiplier() const noexcept { return a_; }
  std::uint64_t offset() const noexcept { return b_; }
  std::uint64_t range() const noexcept { return range_; }

  friend bool operator==(const PairwiseHash&, const PairwiseHash&) = default;

 private:
  std::uint64_t prime_;
  std::uint64_t a_;
  std::uint64_t b_;
  std::uint64_t range_;
};

/// Denominator t of the largest reciprocal 1/t that does not exceed eps.
unsigned reciprocal_denominator(double eps);

/// phi(z) = floor(z / (eps r)) with eps restricted to 1/t.
class BucketMap {
 public:
  /// eps is rounded down to 1/t, t = reciprocal_denominator(eps).
  BucketMap(double eps, double r);

  std::int64_t operator()(double z) const noexcept;

  double width() const noexcept { return width_; }
  double epsilon() const noexcept { return 1.0 / static_cast<double>(t_); }
  unsigned denominator() const noexcept { return t_; }
  double radius() const noexcept { return r_; }

  /// Bounds of Q = {phi(q) - t, ..., phi(q) + t}: every y with |y - q| <= r
  /// lands in Q and every y with |y - q| >= (1 + eps) r lands outside.
  struct Window {
    std::int64_t lo;
    std::int64_t hi;
    bool contains(std::int64_t v) const noexcept { return lo <= v && v <= hi; }
  };
  Window close_window(double q) const noexcept;

 private:
  unsigned t_;
  double r_;
  double width_;
};

/// One-shot phi(z) = floor(z / (eps r)), eps rounded down to 1/t.
std::int64_t bucket(double z, double eps, double r);

}  // namespace diamsketch
