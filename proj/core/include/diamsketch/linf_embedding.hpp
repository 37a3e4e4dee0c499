#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "diamsketch/afn_sketch.hpp"
#include "diamsketch/metric.hpp"

namespace diamsketch {

/// Frechet-type embedding g: [n] -> l_inf^d with coordinates
/// g(i)_j = (2q - 1) * dist(i, S_j).
///
/// For q >= 2 the anchors follow the randomized scale construction: with
/// p = min(1/2, n^(-1/q)), scale j in 1..q draws floor(C n^(1/q) ln n) sets,
/// each keeping every point with probability p^j. Every coordinate is
/// 1-Lipschitz before scaling, so ||g(i) - g(j)|| <= (2q - 1) d(i, j) always;
/// the lower side d(i, j) <= ||g(i) - g(j)|| holds with high probability and is
/// checked by verify_distortion. q = 1 uses the n singletons (an isometry).
class LinfEmbedding {
 public:
  static constexpr double kDefaultOversample = 24.0;

  /// Infinite distances are replaced by the metric's finite closure.
  static LinfEmbedding build(const FiniteMetric& metric, unsigned q, std::uint64_t seed,
                             double oversample = kDefaultOversample);

  std::size_t size() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return anchors_.size(); }
  unsigned q() const noexcept { return q_; }
  double distortion() const noexcept { return 2.0 * q_ - 1.0; }
  std::uint64_t seed() const noexcept { return seed_; }
  double oversample() const noexcept { return oversample_; }

  /// Scaled coordinates of point i.
  std::span<const double> point(std::size_t i) const;
  double coordinate(std::size_t i, std::size_t j) const { return point(i)[j]; }
  double linf(std::size_t i, std::size_t j) const;
  const std::vector<std::vector<std::uint32_t>>& anchors() const noexcept { return anchors_; }

  std::shared_ptr<const PointUniverse> universe() const;

  /// Upper bound on dimension: q * floor(C n^(1/q) ln n), or n when q = 1.
  static std::size_t dimension_for(std::size_t n, unsigned q, double oversample);

  /// CSV, one row per point, d columns.
  void write_csv(std::ostream& out) const;
  /// One anchor set per line, space-separated point indices.
  void write_anchors(std::ostream& out) const;

 private:
  LinfEmbedding() = default;

  std::size_t n_ = 0;
  unsigned q_ = 1;
  std::uint64_t seed_ = 0;
  double oversample_ = kDefaultOversample;
  std::vector<std::vector<std::uint32_t>> anchors_;
  std::vector<double> coords_;  // n x d, scaled
};

struct DistortionReport {
  /// max ||g(i) - g(j)|| / (D d(i, j)); the upper side holds iff <= 1.
  double max_expansion = 0.0;
  /// max d(i, j) / ||g(i) - g(j)||; the lower side holds iff <= 1.
  double max_contraction = 0.0;
  std::size_t upper_violations = 0;
  std::size_t lower_violations = 0;

  bool ok() const noexcept { return upper_violations == 0 && lower_violations == 0; }
};

/// Exact check over all pairs with d(i, j) > 0. Infinite distances are taken
/// from the finite closure, as in build.
DistortionReport verify_distortion(const FiniteMetric& metric, const LinfEmbedding& embedding);

struct VerifiedEmbedding {
  LinfEmbedding embedding;
  DistortionReport report;
  unsigned attempts = 0;
  /// Reports from the rejected attempts, oldest first.
  std::vector<DistortionReport> rejected;
};

/// Builds, verifies and rebuilds with fresh seeds up to max_attempts times.
/// Returns the last attempt even if it failed; check report.ok().
VerifiedEmbedding build_verified_embedding(const FiniteMetric& metric, unsigned q, std::uint64_t seed,
                                           double oversample = LinfEmbedding::kDefaultOversample,
                                           unsigned max_attempts = 3);

}  // namespace diamsketch
