#include "diamsketch/diam_sketch.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "diamsketch/rng.hpp"
#include "diamsketch/serialization.hpp"

namespace diamsketch {

namespace {

constexpr std::uint8_t kMagic[4] = {'D', 'D', 'S', '1'};

AfnParams decision_afn_params(double r, double epsilon, double delta, std::uint64_t seed, std::uint64_t bound) {
  AfnParams p;
  p.r = r;
  p.epsilon = epsilon;
  p.delta = delta;
  p.seed = derive_seed(seed, 0xaf2ULL);
  p.magnitude_bound = bound;
  // A small r is fine here: the query is itself a support point, so the
  // bucket argument needs no lower bound on r.
  p.force_far_below_min = false;
  return p;
}

}  // namespace

DiamDecisionSketch::DiamDecisionSketch(std::shared_ptr<const PointUniverse> universe, double r, double epsilon,
                                       double delta, std::uint64_t seed, std::uint64_t magnitude_bound)
    : global_(universe ? universe->size() : 1, delta, magnitude_bound, derive_seed(seed, 0x910bULL)),
      afn_(universe, decision_afn_params(r, epsilon, delta, seed, magnitude_bound)) {}

void DiamDecisionSketch::update(std::size_t i, std::int64_t delta) {
  global_.update(i, delta);
  afn_.update(i, delta);
}

void DiamDecisionSketch::merge(const DiamDecisionSketch& other) {
  global_.merge(other.global_);
  afn_.merge(other.afn_);
}

DiamDecision DiamDecisionSketch::decide() const {
  DiamDecision out;
  const SampleResult s = global_.sample();
  if (s.status == SampleStatus::kZero) return out;
  if (s.status == SampleStatus::kFail) {
    out.sampler_failed = true;
    return out;
  }
  out.query = s.index;
  const AfnAnswer a = afn_.query_point(s.index);
  out.far = a.far;
  out.witness = a.witness;
  return out;
}

std::vector<std::uint8_t> DiamDecisionSketch::serialize() const {
  ByteWriter out;
  out.reserve(serialized_size());
  out.bytes(kMagic);
  out.u64(global_.serialized_size());
  out.bytes(global_.serialize());
  out.bytes(afn_.serialize());
  return out.take();
}

EstimatorPlan EstimatorPlan::make(double c, double delta, double d_min, double d_max) {
  if (!(c > 6.0)) throw std::invalid_argument("estimator: c must exceed 6");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("estimator: delta must lie in (0, 1)");
  EstimatorPlan plan;
  plan.c = c;
  plan.delta = delta;
  const double qd = std::floor((c - 2.0) / 4.0);
  if (qd < 2.0) throw std::invalid_argument("estimator: c gives q = floor((c - 2) / 4) < 2");
  plan.q = static_cast<unsigned>(qd);
  const double big_d = plan.distortion();
  unsigned t = 2;
  for (; t < 1'000'000; ++t) {
    const double eps = 1.0 / t;
    if (c - 2.0 * eps >= 4.0 * plan.q - 2.0 && 2.0 * big_d * (1.0 + eps) * (1.0 + eps) <= c) break;
  }
  if (t == 1'000'000) throw std::invalid_argument("estimator: no admissible epsilon for this c");
  plan.t = t;
  plan.epsilon = 1.0 / t;
  plan.stretch = 2.0 * (1.0 + plan.epsilon) * big_d;
  plan.ratio = c / plan.stretch;
  if (d_min > 0.0 && d_max > 0.0)
    for (double r = d_min / plan.stretch; r < d_max; r *= plan.ratio) plan.thresholds.push_back(r);
  return plan;
}

std::size_t EstimatorPlan::grid_size(double c, double aspect) {
  return make(c, 0.1, 1.0, aspect).thresholds.size();
}

EstimatorContext EstimatorContext::build(const FiniteMetric& metric, const EstimatorConfig& config) {
  const FiniteMetric m = metric.all_finite() ? metric : metric.finite_closure();
  EstimatorContext ctx;
  ctx.config = config;
  ctx.n = m.size();
  ctx.plan = EstimatorPlan::make(config.c, config.delta, m.min_positive_distance(), m.max_finite_distance());
  VerifiedEmbedding v =
      build_verified_embedding(m, ctx.plan.q, derive_seed(config.seed, 0xe1ULL), config.oversample, config.max_attempts);
  ctx.distortion = v.report;
  ctx.embedding_attempts = v.attempts;
  ctx.embedding = std::make_shared<const LinfEmbedding>(std::move(v.embedding));
  ctx.universe = ctx.embedding->universe();
  return ctx;
}

std::uint64_t EstimatorContext::threshold_seed(std::size_t t) const { return derive_seed(config.seed, 0xd1a3ULL, t); }

DiamDecisionSketch EstimatorContext::make_sketch(std::size_t t) const {
  return DiamDecisionSketch(universe, plan.embedded_radius(t), plan.epsilon, plan.component_delta(), threshold_seed(t),
                            config.magnitude_bound);
}

DiamEstimator::DiamEstimator(const FiniteMetric& metric, const EstimatorConfig& config)
    : DiamEstimator(std::make_shared<const EstimatorContext>(EstimatorContext::build(metric, config))) {}

DiamEstimator::DiamEstimator(std::shared_ptr<const EstimatorContext> context) : context_(std::move(context)) {
  sketches_.reserve(context_->plan.thresholds.size());
  for (std::size_t t = 0; t < context_->plan.thresholds.size(); ++t) sketches_.push_back(context_->make_sketch(t));
}

void DiamEstimator::update(std::size_t i, std::int64_t delta) {
  if (i >= context_->n) throw std::out_of_range("DiamEstimator::update: index out of range");
  for (auto& s : sketches_) s.update(i, delta);
}

namespace {

ThresholdDecision record(const EstimatorContext& ctx, std::size_t t, const DiamDecision& d) {
  return ThresholdDecision{t, ctx.plan.thresholds[t], ctx.plan.embedded_radius(t), d.far, d.query, d.witness};
}

double eta_of(const std::vector<ThresholdDecision>& decisions) {
  double eta = 0.0;
  for (const auto& d : decisions)
    if (d.far) eta = std::max(eta, d.threshold);
  return eta;
}

}  // namespace

EstimateResult DiamEstimator::estimate() const {
  EstimateResult out;
  for (std::size_t t = 0; t < sketches_.size(); ++t) out.decisions.push_back(record(*context_, t, sketches_[t].decide()));
  out.eta = eta_of(out.decisions);
  return out;
}

SpaceReport DiamEstimator::space() const {
  SpaceReport r;
  r.embedding_dimension = context_->embedding->dimension();
  r.grid_size = sketches_.size();
  for (std::size_t t = 0; t < sketches_.size(); ++t) {
    r.entries.push_back({"threshold_" + std::to_string(t), sketches_[t].row_count(), sketches_[t].serialized_size()});
    r.total_rows += sketches_[t].row_count();
    r.total_bytes += sketches_[t].serialized_size();
  }
  return r;
}

EstimateResult estimate_by_replay(const EstimatorContext& context, std::span<const std::int64_t> x, bool early_stop) {
  if (x.size() != context.n) throw std::invalid_argument("estimate_by_replay: vector length mismatch");
  EstimateResult out;
  const std::size_t grid = context.plan.thresholds.size();
  for (std::size_t step = 0; step < grid; ++step) {
    const std::size_t t = early_stop ? grid - 1 - step : step;
    DiamDecisionSketch sketch = context.make_sketch(t);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] != 0) sketch.update(i, x[i]);
    out.decisions.push_back(record(context, t, sketch.decide()));
    if (early_stop && out.decisions.back().far) break;
  }
  out.eta = eta_of(out.decisions);
  return out;
}

SpaceReport plan_space(const EstimatorContext& context) {
  SpaceReport r;
  r.embedding_dimension = context.embedding->dimension();
  r.grid_size = context.plan.thresholds.size();
  for (std::size_t t = 0; t < r.grid_size; ++t) {
    const DiamDecisionSketch s = context.make_sketch(t);
    r.entries.push_back({"threshold_" + std::to_string(t), s.row_count(), s.serialized_size()});
    r.total_rows += s.row_count();
    r.total_bytes += s.serialized_size();
  }
  return r;
}

}  // namespace diamsketch
