#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "diamsketch/hashing.hpp"
#include "diamsketch/l0_sampler.hpp"

namespace diamsketch {

/// n points in R^k, row-major. Normalization shifts every coordinate so its
/// minimum is 0 and divides by the smallest positive pairwise l_inf distance,
/// so normalized D_min = 1 and the points lie in [0, Delta]^k.
class PointUniverse {
 public:
  PointUniverse(std::size_t n, std::size_t k, std::vector<double> coords);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return k_; }

  double raw(std::size_t i, std::size_t l) const { return coords_[i * k_ + l]; }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * k_, k_}; }
  double normalized(std::size_t i, std::size_t l) const { return (raw(i, l) - shift_[l]) / scale_; }
  /// Normalized value of an arbitrary coordinate along axis l.
  double normalize(std::size_t l, double z) const { return (z - shift_[l]) / scale_; }

  /// Smallest positive raw distance (1 when every pair coincides).
  double scale() const noexcept { return scale_; }
  double min_distance() const noexcept { return scale_; }
  double max_distance() const noexcept { return d_max_; }
  /// Largest normalized coordinate.
  double aspect_bound() const noexcept { return delta_; }

  double linf(std::size_t i, std::size_t j) const;
  double linf_to(std::span<const double> q, std::size_t i) const;

  /// One point per line, k whitespace-separated reals.
  static PointUniverse read(std::istream& in);
  void write(std::ostream& out) const;

 private:
  std::size_t n_;
  std::size_t k_;
  std::vector<double> coords_;
  std::vector<double> shift_;
  double scale_ = 1.0;
  double d_max_ = 0.0;
  double delta_ = 0.0;
};

struct AfnParams {
  double r = 1.0;
  double epsilon = 0.5;
  double delta = 0.05;
  std::uint64_t seed = 0;
  std::uint64_t magnitude_bound = std::uint64_t{1} << 31;
  /// Answer Far whenever r < D_min; the bucket analysis assumes r >= 1 after
  /// normalization. Composite sketches that handle small r themselves turn it off.
  bool force_far_below_min = true;
  /// Overrides K = ceil(4/eps + 2) when nonzero.
  std::uint64_t hash_range_override = 0;
};

/// Far witness: run `run` sampled point `index` from its coordinate-`coordinate` sampler.
struct AfnWitness {
  std::size_t run = 0;
  std::size_t coordinate = 0;
  std::size_t index = 0;
  double distance = 0.0;
};

struct AfnAnswer {
  bool far = false;
  bool forced = false;
  std::optional<AfnWitness> witness;
};

/// T = ceil(24 ln(1/delta) / eps) independent runs of the bucket-gated AFN
/// algorithm. Run t hashes phi(u_i^l) with its own pairwise hash into
/// K = ceil(4/eps + 2) cells and feeds (i, delta) to sampler (t, l) iff the
/// hash is 0. A query returns Far when some sampler returns a point at l_inf
/// distance > r from q.
class AfnSketch {
 public:
  AfnSketch(std::shared_ptr<const PointUniverse> universe, const AfnParams& params);

  void update(std::size_t i, std::int64_t delta);
  void merge(const AfnSketch& other);

  /// q in raw coordinates.
  AfnAnswer query(std::span<const double> q) const;
  AfnAnswer query_point(std::size_t j) const;
  /// Outcome of a single run; never forced.
  std::optional<AfnWitness> query_run(std::size_t run, std::span<const double> q) const;

  bool forced_far() const noexcept { return forced_; }
  std::size_t runs() const noexcept { return runs_.size(); }
  std::size_t dim() const noexcept { return universe_->dim(); }
  std::uint64_t hash_range() const noexcept { return range_; }
  double epsilon() const noexcept { return buckets_.epsilon(); }
  double radius() const noexcept { return params_.r; }
  double normalized_radius() const noexcept { return r_norm_; }
  const AfnParams& params() const noexcept { return params_; }
  const PointUniverse& universe() const noexcept { return *universe_; }

  /// 1{h_run(phi(u_i^l)) = 0}.
  bool gate(std::size_t run, std::size_t l, std::size_t i) const;
  const L0Sampler& sampler(std::size_t run, std::size_t l) const { return runs_.at(run).samplers.at(l); }
  const PairwiseHash& hash(std::size_t run) const { return runs_.at(run).hash; }
  const BucketMap& buckets() const noexcept { return buckets_; }

  std::size_t row_count() const noexcept;
  std::size_t serialized_size() const noexcept;
  std::vector<std::uint8_t> serialize() const;
  /// Restores counter state; the universe and parameters must match the header.
  static AfnSketch deserialize(std::shared_ptr<const PointUniverse> universe, const AfnParams& params,
                               std::span<const std::uint8_t> bytes);

  static std::size_t runs_for(double epsilon, double delta);
  static std::uint64_t hash_range_for(double epsilon);
  /// Rows are bounded by kRowConstant k (log2 n + 1)(log2 k + 1)(log2(1/delta) + 1) / eps.
  static constexpr double kRowConstant = 288.0;
  static double row_bound(std::size_t n, std::size_t k, double epsilon, double delta);

  friend bool operator==(const AfnSketch& a, const AfnSketch& b);

 private:
  struct Run {
    PairwiseHash hash;
    std::vector<L0Sampler> samplers;
  };

  std::int64_t cell(std::size_t i, std::size_t l) const;
  bool same_shape(const AfnSketch& other) const noexcept;

  std::shared_ptr<const PointUniverse> universe_;
  AfnParams params_;
  BucketMap buckets_;
  double r_norm_;
  bool forced_;
  std::uint64_t range_;
  std::vector<Run> runs_;
};

}  // namespace diamsketch
