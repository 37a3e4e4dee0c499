#include "diamsketch/afn_sketch.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "diamsketch/rng.hpp"
#include "diamsketch/serialization.hpp"

namespace diamsketch {

namespace {

constexpr std::uint8_t kMagic[4] = {'A', 'F', 'N', '1'};
constexpr std::uint64_t kMinHashDomain = std::uint64_t{1} << 20;
constexpr double kMaxCell = 0x1.0p61;

}  // namespace

PointUniverse::PointUniverse(std::size_t n, std::size_t k, std::vector<double> coords)
    : n_(n), k_(k), coords_(std::move(coords)), shift_(k, 0.0) {
  if (n == 0) throw std::invalid_argument("PointUniverse: empty point set");
  if (k == 0) throw std::invalid_argument("PointUniverse: dimension must be positive");
  if (coords_.size() != n * k) throw std::invalid_argument("PointUniverse: coordinate count mismatch");
  for (double v : coords_)
    if (!std::isfinite(v)) throw std::invalid_argument("PointUniverse: coordinates must be finite");
  for (std::size_t l = 0; l < k; ++l) {
    double lo = coords_[l];
    for (std::size_t i = 1; i < n; ++i) lo = std::min(lo, coords_[i * k + l]);
    shift_[l] = lo;
  }
  double d_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = linf(i, j);
      d_max_ = std::max(d_max_, d);
      if (d > 0.0) d_min = std::min(d_min, d);
    }
  scale_ = std::isfinite(d_min) ? d_min : 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) delta_ = std::max(delta_, normalized(i, l));
}

double PointUniverse::linf(std::size_t i, std::size_t j) const {
  double best = 0.0;
  for (std::size_t l = 0; l < k_; ++l) best = std::max(best, std::abs(coords_[i * k_ + l] - coords_[j * k_ + l]));
  return best;
}

double PointUniverse::linf_to(std::span<const double> q, std::size_t i) const {
  if (q.size() != k_) throw std::invalid_argument("PointUniverse: query dimension mismatch");
  double best = 0.0;
  for (std::size_t l = 0; l < k_; ++l) best = std::max(best, std::abs(q[l] - coords_[i * k_ + l]));
  return best;
}

PointUniverse PointUniverse::read(std::istream& in) {
  std::vector<double> coords;
  std::size_t k = 0;
  std::size_t n = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<double> row;
    double v = 0.0;
    while (fields >> v) row.push_back(v);
    if (!fields.eof()) throw std::runtime_error("points: bad number on line " + std::to_string(line_no));
    if (row.empty()) continue;
    if (k == 0) k = row.size();
    if (row.size() != k) throw std::runtime_error("points: wrong dimension on line " + std::to_string(line_no));
    coords.insert(coords.end(), row.begin(), row.end());
    ++n;
  }
  return PointUniverse(n, k, std::move(coords));
}

void PointUniverse::write(std::ostream& out) const {
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t l = 0; l < k_; ++l) out << (l ? " " : "") << raw(i, l);
    out << '\n';
  }
  out.precision(old);
}

std::size_t AfnSketch::runs_for(double epsilon, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("AfnSketch: delta must lie in (0, 1)");
  const double eps = 1.0 / reciprocal_denominator(epsilon);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(24.0 * std::log(1.0 / delta) / eps - 1e-9)));
}

std::uint64_t AfnSketch::hash_range_for(double epsilon) {
  return 4 * static_cast<std::uint64_t>(reciprocal_denominator(epsilon)) + 2;
}

double AfnSketch::row_bound(std::size_t n, std::size_t k, double epsilon, double delta) {
  const double eps = 1.0 / reciprocal_denominator(epsilon);
  return kRowConstant * static_cast<double>(k) * (std::log2(static_cast<double>(n)) + 1.0) *
         (std::log2(static_cast<double>(k)) + 1.0) * (std::log2(1.0 / delta) + 1.0) / eps;
}

AfnSketch::AfnSketch(std::shared_ptr<const PointUniverse> universe, const AfnParams& params)
    : universe_(std::move(universe)),
      params_(params),
      buckets_(params.epsilon, params.r > 0.0 ? params.r / (universe_ ? universe_->scale() : 1.0) : 1.0),
      r_norm_(0.0),
      forced_(false),
      range_(0) {
  if (!universe_) throw std::invalid_argument("AfnSketch: missing point universe");
  if (!(params.r > 0.0) || !std::isfinite(params.r)) throw std::invalid_argument("AfnSketch: r must be positive");
  if (!(params.epsilon > 0.0 && params.epsilon < 1.0))
    throw std::invalid_argument("AfnSketch: epsilon must lie in (0, 1)");
  r_norm_ = params.r / universe_->scale();
  forced_ = params.force_far_below_min && r_norm_ < 1.0;
  range_ = params.hash_range_override ? params.hash_range_override : hash_range_for(params.epsilon);

  const double top_cell = std::floor(universe_->aspect_bound() / buckets_.width());
  if (!(top_cell < kMaxCell)) throw std::invalid_argument("AfnSketch: r too small for the coordinate range");
  const auto domain = std::max<std::uint64_t>(static_cast<std::uint64_t>(top_cell) + 1, kMinHashDomain);

  const std::size_t n = universe_->size();
  const std::size_t k = universe_->dim();
  const double sampler_delta = 1.0 / (2.0 * static_cast<double>(k));
  const std::size_t t_runs = runs_for(params.epsilon, params.delta);
  runs_.reserve(t_runs);
  for (std::size_t t = 0; t < t_runs; ++t) {
    const std::uint64_t run_seed = derive_seed(params.seed, 0xaf1ULL, t);
    Run run{PairwiseHash(derive_seed(run_seed, 0x4a5fULL), domain, range_), {}};
    run.samplers.reserve(k);
    for (std::size_t l = 0; l < k; ++l)
      run.samplers.emplace_back(n, sampler_delta, params.magnitude_bound, derive_seed(run_seed, 0x5a3ULL, l));
    runs_.push_back(std::move(run));
  }
}

std::int64_t AfnSketch::cell(std::size_t i, std::size_t l) const {
  return buckets_(universe_->normalized(i, l));
}

bool AfnSketch::gate(std::size_t run, std::size_t l, std::size_t i) const {
  return runs_.at(run).hash(cell(i, l)) == 0;
}

void AfnSketch::update(std::size_t i, std::int64_t delta) {
  if (i >= universe_->size()) throw std::out_of_range("AfnSketch::update: index out of range");
  const std::size_t k = universe_->dim();
  std::vector<std::int64_t> cells(k);
  for (std::size_t l = 0; l < k; ++l) cells[l] = cell(i, l);
  for (auto& run : runs_)
    for (std::size_t l = 0; l < k; ++l)
      if (run.hash(cells[l]) == 0) run.samplers[l].update(i, delta);
}

bool AfnSketch::same_shape(const AfnSketch& other) const noexcept {
  return universe_->size() == other.universe_->size() && universe_->dim() == other.universe_->dim() &&
         params_.r == other.params_.r && buckets_.denominator() == other.buckets_.denominator() &&
         params_.delta == other.params_.delta && params_.seed == other.params_.seed &&
         params_.magnitude_bound == other.params_.magnitude_bound && range_ == other.range_ &&
         forced_ == other.forced_ && runs_.size() == other.runs_.size();
}

void AfnSketch::merge(const AfnSketch& other) {
  if (!same_shape(other)) throw SketchMismatch("AfnSketch::merge: parameters or seed differ");
  for (std::size_t t = 0; t < runs_.size(); ++t)
    for (std::size_t l = 0; l < runs_[t].samplers.size(); ++l) runs_[t].samplers[l].merge(other.runs_[t].samplers[l]);
}

std::optional<AfnWitness> AfnSketch::query_run(std::size_t run, std::span<const double> q) const {
  const Run& r = runs_.at(run);
  for (std::size_t l = 0; l < r.samplers.size(); ++l) {
    const SampleResult s = r.samplers[l].sample();
    if (s.status != SampleStatus::kIndex) continue;  // Zero, or Fail absorbed
    const double d = universe_->linf_to(q, s.index);
    if (d > params_.r) return AfnWitness{run, l, s.index, d};
  }
  return std::nullopt;
}

AfnAnswer AfnSketch::query(std::span<const double> q) const {
  if (q.size() != universe_->dim()) throw std::invalid_argument("AfnSketch::query: dimension mismatch");
  if (forced_) return AfnAnswer{true, true, std::nullopt};
  for (std::size_t t = 0; t < runs_.size(); ++t)
    if (auto w = query_run(t, q)) return AfnAnswer{true, false, w};
  return AfnAnswer{};
}

AfnAnswer AfnSketch::query_point(std::size_t j) const {
  if (j >= universe_->size()) throw std::out_of_range("AfnSketch::query_point: index out of range");
  return query(universe_->point(j));
}

std::size_t AfnSketch::row_count() const noexcept {
  std::size_t rows = 0;
  for (const auto& run : runs_)
    for (const auto& s : run.samplers) rows += s.row_count();
  return rows;
}

std::size_t AfnSketch::serialized_size() const noexcept {
  std::size_t bytes = 4 + 8 * 11;
  for (const auto& run : runs_)
    for (const auto& s : run.samplers) bytes += s.serialized_size();
  return bytes;
}

std::vector<std::uint8_t> AfnSketch::serialize() const {
  ByteWriter out;
  out.reserve(serialized_size());
  out.bytes(kMagic);
  out.u64(universe_->size());
  out.u64(universe_->dim());
  out.f64(params_.r);
  out.u64(buckets_.denominator());
  out.f64(params_.delta);
  out.u64(params_.seed);
  out.u64(params_.magnitude_bound);
  out.u64(forced_ ? 1 : 0);
  out.u64(range_);
  out.u64(runs_.size());
  out.u64(universe_->dim() * runs_.size());
  for (const auto& run : runs_)
    for (const auto& s : run.samplers) out.bytes(s.serialize());
  return out.take();
}

AfnSketch AfnSketch::deserialize(std::shared_ptr<const PointUniverse> universe, const AfnParams& params,
                                 std::span<const std::uint8_t> bytes) {
  AfnSketch sketch(std::move(universe), params);
  ByteReader in(bytes);
  in.expect_magic(kMagic);
  const bool header_ok = in.u64() == sketch.universe_->size() && in.u64() == sketch.universe_->dim() &&
                         in.f64() == params.r && in.u64() == sketch.buckets_.denominator() &&
                         in.f64() == params.delta && in.u64() == params.seed &&
                         in.u64() == params.magnitude_bound && in.u64() == (sketch.forced_ ? 1u : 0u) &&
                         in.u64() == sketch.range_ && in.u64() == sketch.runs_.size() &&
                         in.u64() == sketch.universe_->dim() * sketch.runs_.size();
  if (!header_ok) throw SerializationError("AfnSketch: header does not match parameters");
  for (auto& run : sketch.runs_)
    for (auto& s : run.samplers) {
      L0Sampler restored = L0Sampler::deserialize(in.take(s.serialized_size()));
      if (restored.seed() != s.seed()) throw SerializationError("AfnSketch: sampler seed mismatch");
      s = std::move(restored);
    }
  in.expect_end();
  return sketch;
}

bool operator==(const AfnSketch& a, const AfnSketch& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t t = 0; t < a.runs_.size(); ++t) {
    if (!(a.runs_[t].hash == b.runs_[t].hash)) return false;
    if (a.runs_[t].samplers != b.runs_[t].samplers) return false;
  }
  return true;
}

}  // namespace diamsketch
