#include "diamsketch/linf_embedding.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "diamsketch/rng.hpp"

namespace diamsketch {

namespace {

FiniteMetric closed(const FiniteMetric& metric) {
  return metric.all_finite() ? metric : metric.finite_closure();
}

std::size_t sets_per_scale(std::size_t n, unsigned q, double oversample) {
  const double nd = static_cast<double>(n);
  const double count = std::floor(oversample * std::pow(nd, 1.0 / q) * std::log(nd));
  return std::max<std::size_t>(1, static_cast<std::size_t>(count));
}

}  // namespace

std::size_t LinfEmbedding::dimension_for(std::size_t n, unsigned q, double oversample) {
  if (q == 1 || n < 2) return n;
  return q * sets_per_scale(n, q, oversample);
}

LinfEmbedding LinfEmbedding::build(const FiniteMetric& metric, unsigned q, std::uint64_t seed, double oversample) {
  if (q == 0) throw std::invalid_argument("LinfEmbedding: q must be at least 1");
  if (!(oversample > 0.0)) throw std::invalid_argument("LinfEmbedding: oversample constant must be positive");
  const std::size_t n = metric.size();
  if (n == 0) throw std::invalid_argument("LinfEmbedding: empty metric");

  LinfEmbedding e;
  e.n_ = n;
  e.q_ = q;
  e.seed_ = seed;
  e.oversample_ = oversample;

  if (q == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) e.anchors_.push_back({static_cast<std::uint32_t>(i)});
  } else {
    const double p = std::min(0.5, std::pow(static_cast<double>(n), -1.0 / q));
    const std::size_t per_scale = sets_per_scale(n, q, oversample);
    for (unsigned j = 1; j <= q; ++j) {
      const double keep = std::pow(p, j);
      for (std::size_t s = 0; s < per_scale; ++s) {
        std::vector<std::uint32_t> set;
        // Empty sets have no distance function; draw again.
        for (std::uint64_t attempt = 0; set.empty(); ++attempt) {
          CounterRng rng(derive_seed(derive_seed(seed, j), s, attempt));
          for (std::size_t i = 0; i < n; ++i)
            if (rng.uniform01() < keep) set.push_back(static_cast<std::uint32_t>(i));
        }
        e.anchors_.push_back(std::move(set));
      }
    }
  }

  const FiniteMetric m = closed(metric);
  const std::size_t d = e.anchors_.size();
  const double scale = e.distortion();
  e.coords_.assign(n * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const auto& set = e.anchors_[j];
    for (std::size_t i = 0; i < n; ++i) {
      double best = kInfinity;
      for (auto s : set) best = std::min(best, m.distance(i, s));
      e.coords_[i * d + j] = scale * best;
    }
  }
  return e;
}

std::span<const double> LinfEmbedding::point(std::size_t i) const {
  if (i >= n_) throw std::out_of_range("LinfEmbedding::point: index out of range");
  const std::size_t d = dimension();
  return {coords_.data() + i * d, d};
}

double LinfEmbedding::linf(std::size_t i, std::size_t j) const {
  const auto a = point(i);
  const auto b = point(j);
  double best = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) best = std::max(best, std::abs(a[t] - b[t]));
  return best;
}

std::shared_ptr<const PointUniverse> LinfEmbedding::universe() const {
  return std::make_shared<const PointUniverse>(n_, dimension(), coords_);
}

void LinfEmbedding::write_csv(std::ostream& out) const {
  const std::size_t d = dimension();
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << coords_[i * d + j];
    out << '\n';
  }
  out.precision(old);
}

void LinfEmbedding::write_anchors(std::ostream& out) const {
  for (const auto& set : anchors_) {
    for (std::size_t t = 0; t < set.size(); ++t) out << (t ? " " : "") << set[t];
    out << '\n';
  }
}

DistortionReport verify_distortion(const FiniteMetric& metric, const LinfEmbedding& embedding) {
  if (metric.size() != embedding.size()) throw std::invalid_argument("verify_distortion: size mismatch");
  const FiniteMetric m = closed(metric);
  const double big_d = embedding.distortion();
  DistortionReport report;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      const double d = m.distance(i, j);
      if (d <= 0.0) continue;
      const double e = embedding.linf(i, j);
      report.max_expansion = std::max(report.max_expansion, e / (big_d * d));
      report.max_contraction = std::max(report.max_contraction, e > 0.0 ? d / e : kInfinity);
      if (e > big_d * d) ++report.upper_violations;
      if (e < d) ++report.lower_violations;
    }
  return report;
}

VerifiedEmbedding build_verified_embedding(const FiniteMetric& metric, unsigned q, std::uint64_t seed,
                                           double oversample, unsigned max_attempts) {
  if (max_attempts == 0) throw std::invalid_argument("build_verified_embedding: need at least one attempt");
  std::vector<DistortionReport> rejected;
  for (unsigned a = 0;; ++a) {
    LinfEmbedding e = LinfEmbedding::build(metric, q, derive_seed(seed, 0xe3b0ULL, a), oversample);
    DistortionReport report = verify_distortion(metric, e);
    if (report.ok() || a + 1 == max_attempts)
      return VerifiedEmbedding{std::move(e), report, a + 1, std::move(rejected)};
    rejected.push_back(report);
  }
}

}  // namespace diamsketch
