#include "diamsketch/hashing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "diamsketch/rng.hpp"

namespace diamsketch {

namespace {

using u128 = unsigned __int128;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) noexcept {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) noexcept {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

}  // namespace

bool is_prime(std::uint64_t value) noexcept {
  if (value < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (value % p == 0) return value == p;
  }
  std::uint64_t d = value - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These twelve bases are a deterministic witness set below 2^64.
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = pow_mod(a, d, value);
    if (x == 1 || x == value - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod(x, x, value);
      if (x == value - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::uint64_t next_prime_above(std::uint64_t value) {
  for (std::uint64_t candidate = value + 1; candidate > value; ++candidate)
    if (is_prime(candidate)) return candidate;
  throw std::overflow_error("next_prime_above: no 64-bit prime above value");
}

PairwiseHash::PairwiseHash(std::uint64_t seed, std::uint64_t domain_bound, std::uint64_t range)
    : range_(range) {
  if (range == 0) throw std::invalid_argument("PairwiseHash: range must be positive");
  if (domain_bound == 0) throw std::invalid_argument("PairwiseHash: domain bound must be positive");
  if (domain_bound > (std::uint64_t{1} << 62)) throw std::invalid_argument("PairwiseHash: domain bound too large");
  prime_ = next_prime_above(2 * domain_bound);
  CounterRng rng(derive_seed(seed, 0x4a54ULL));
  a_ = 1 + rng.uniform_below(prime_ - 1);
  b_ = rng.uniform_below(prime_);
}

std::uint64_t PairwiseHash::operator()(std::int64_t key) const noexcept {
  const auto p = static_cast<std::int64_t>(prime_);
  const auto reduced = static_cast<std::uint64_t>(((key % p) + p) % p);
  const auto value = static_cast<std::uint64_t>((static_cast<u128>(a_) * reduced + b_) % prime_);
  return value % range_;
}

unsigned reciprocal_denominator(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("reciprocal_denominator: eps must be positive");
  // The small slack keeps eps = 1/t (as a double) at t rather than t + 1.
  const double t = std::ceil(1.0 / eps - 1e-9);
  if (t > static_cast<double>(std::numeric_limits<unsigned>::max()))
    throw std::invalid_argument("reciprocal_denominator: eps too small");
  return t < 1.0 ? 1u : static_cast<unsigned>(t);
}

BucketMap::BucketMap(double eps, double r) : t_(reciprocal_denominator(eps)), r_(r) {
  if (!(r > 0.0)) throw std::invalid_argument("BucketMap: r must be positive");
  width_ = r / static_cast<double>(t_);
}

std::int64_t BucketMap::operator()(double z) const noexcept {
  return static_cast<std::int64_t>(std::floor(z * static_cast<double>(t_) / r_));
}

BucketMap::Window BucketMap::close_window(double q) const noexcept {
  const std::int64_t centre = (*this)(q);
  return {centre - static_cast<std::int64_t>(t_), centre + static_cast<std::int64_t>(t_)};
}

std::int64_t bucket(double z, double eps, double r) { return BucketMap(eps, r)(z); }

}  // namespace diamsketch
