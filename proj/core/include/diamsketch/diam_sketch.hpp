#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diamsketch/afn_sketch.hpp"
#include "diamsketch/l0_sampler.hpp"
#include "diamsketch/linf_embedding.hpp"
#include "diamsketch/metric.hpp"

namespace diamsketch {

struct DiamDecision {
  bool far = false;
  /// Index drawn by the global sampler and used as the AFN query.
  std::optional<std::size_t> query;
  std::optional<AfnWitness> witness;
  /// The global sampler failed; reported as Close.
  bool sampler_failed = false;
};

/// Decides diam <= r (Close) versus diam >= 2(1 + eps) r (Far) in l_inf^k:
/// a global l0 sample becomes the query of an AFN sketch at radius r. Both
/// components see every update and each gets failure budget delta.
class DiamDecisionSketch {
 public:
  DiamDecisionSketch(std::shared_ptr<const PointUniverse> universe, double r, double epsilon, double delta,
                     std::uint64_t seed, std::uint64_t magnitude_bound = std::uint64_t{1} << 31);

  void update(std::size_t i, std::int64_t delta);
  void merge(const DiamDecisionSketch& other);
  DiamDecision decide() const;

  double radius() const noexcept { return afn_.radius(); }
  const L0Sampler& global_sampler() const noexcept { return global_; }
  const AfnSketch& afn() const noexcept { return afn_; }

  std::size_t row_count() const noexcept { return global_.row_count() + afn_.row_count(); }
  std::size_t serialized_size() const noexcept { return 4 + 8 + global_.serialized_size() + afn_.serialized_size(); }
  std::vector<std::uint8_t> serialize() const;

  friend bool operator==(const DiamDecisionSketch& a, const DiamDecisionSketch& b) {
    return a.global_ == b.global_ && a.afn_ == b.afn_;
  }

 private:
  L0Sampler global_;
  AfnSketch afn_;
};

/// Parameters fixed by the approximation factor c:
///   q   = floor((c - 2) / 4), required >= 2,
///   eps = largest 1/t with c - 2 eps >= 4q - 2 and 2(2q - 1)(1 + eps)^2 <= c,
///   A   = 2(1 + eps)(2q - 1), the factor between guaranteed-Far and Far-certified,
///   gamma = c / A >= 1 + eps, the grid ratio.
struct EstimatorPlan {
  double c = 10.0;
  unsigned q = 2;
  unsigned t = 4;
  double epsilon = 0.25;
  double stretch = 7.5;  // A
  double ratio = 4.0 / 3.0;  // gamma
  double delta = 0.1;
  /// Metric-unit thresholds r_0 = D_min / A, r_{t+1} = gamma r_t, while r_t < D_max.
  std::vector<double> thresholds;

  double distortion() const noexcept { return 2.0 * q - 1.0; }
  /// Each threshold sketch runs at embedded radius (2q - 1) r_t.
  double embedded_radius(std::size_t t) const { return distortion() * thresholds.at(t); }
  /// Failure budget per component (global sampler, AFN) of each threshold sketch.
  double component_delta() const noexcept { return delta / (2.0 * static_cast<double>(std::max<std::size_t>(1, thresholds.size()))); }

  /// Throws std::invalid_argument when c <= 6 or q < 2.
  static EstimatorPlan make(double c, double delta, double d_min, double d_max);
  /// Grid length for a metric with aspect ratio `aspect` (D_min = 1).
  static std::size_t grid_size(double c, double aspect);
};

struct EstimatorConfig {
  double c = 10.0;
  double delta = 0.1;
  std::uint64_t seed = 0;
  double oversample = 1.0;
  unsigned max_attempts = 3;
  std::uint64_t magnitude_bound = std::uint64_t{1} << 31;
};

/// Embedding, point universe and threshold plan shared by every estimator
/// built on one metric.
struct EstimatorContext {
  EstimatorConfig config;
  EstimatorPlan plan;
  std::shared_ptr<const LinfEmbedding> embedding;
  DistortionReport distortion;
  unsigned embedding_attempts = 0;
  std::shared_ptr<const PointUniverse> universe;
  std::size_t n = 0;

  static EstimatorContext build(const FiniteMetric& metric, const EstimatorConfig& config);
  std::uint64_t threshold_seed(std::size_t t) const;
  DiamDecisionSketch make_sketch(std::size_t t) const;
};

struct ThresholdDecision {
  std::size_t index = 0;
  double threshold = 0.0;   // metric units
  double embedded = 0.0;    // l_inf radius given to the sketch
  bool far = false;
  std::optional<std::size_t> query;
  std::optional<AfnWitness> witness;
};

struct EstimateResult {
  double eta = 0.0;
  std::vector<ThresholdDecision> decisions;
};

struct SpaceEntry {
  std::string name;
  std::size_t rows = 0;
  std::size_t bytes = 0;
};

struct SpaceReport {
  std::vector<SpaceEntry> entries;
  std::size_t total_rows = 0;
  std::size_t total_bytes = 0;
  std::size_t embedding_dimension = 0;
  std::size_t grid_size = 0;
};

/// Streaming estimator: one decision sketch per threshold, all live at once.
/// eta = largest threshold whose sketch answers Far, 0 if none.
class DiamEstimator {
 public:
  DiamEstimator(const FiniteMetric& metric, const EstimatorConfig& config);
  explicit DiamEstimator(std::shared_ptr<const EstimatorContext> context);

  void update(std::size_t i, std::int64_t delta);
  EstimateResult estimate() const;

  const EstimatorContext& context() const noexcept { return *context_; }
  const DiamDecisionSketch& sketch(std::size_t t) const { return sketches_.at(t); }
  SpaceReport space() const;

 private:
  std::shared_ptr<const EstimatorContext> context_;
  std::vector<DiamDecisionSketch> sketches_;
};

/// Same answer as feeding x to a DiamEstimator (identical seeds, linear
/// state), but holds one threshold sketch at a time. With early_stop the grid
/// is scanned from the top and stops at the first Far; eta is unchanged and
/// only the evaluated thresholds are listed.
EstimateResult estimate_by_replay(const EstimatorContext& context, std::span<const std::int64_t> x,
                                  bool early_stop = false);

/// Space of the full streaming estimator, computed without allocating counters.
SpaceReport plan_space(const EstimatorContext& context);

}  // namespace diamsketch
