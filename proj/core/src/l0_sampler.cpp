#include "diamsketch/l0_sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "diamsketch/rng.hpp"
#include "diamsketch/serialization.hpp"

namespace diamsketch {

namespace {

constexpr std::uint64_t kP = L0Sampler::kFieldPrime;
constexpr std::uint8_t kMagic[4] = {'L', '0', 'S', '1'};

std::uint64_t field_reduce(unsigned __int128 v) noexcept {
  // 2^61 = 1 (mod p), so fold the high bits down twice.
  std::uint64_t lo = static_cast<std::uint64_t>(v & kP);
  std::uint64_t hi = static_cast<std::uint64_t>(v >> 61);
  std::uint64_t r = lo + hi;
  r = (r & kP) + (r >> 61);
  return r >= kP ? r - kP : r;
}

std::uint64_t field_mul(std::uint64_t a, std::uint64_t b) noexcept {
  return field_reduce(static_cast<unsigned __int128>(a) * b);
}

std::uint64_t field_add(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t r = a + b;
  return r >= kP ? r - kP : r;
}

std::uint64_t field_pow(std::uint64_t base, std::uint64_t exp) noexcept {
  std::uint64_t result = 1;
  while (exp > 0) {
    if (exp & 1) result = field_mul(result, base);
    base = field_mul(base, base);
    exp >>= 1;
  }
  return result;
}

std::uint64_t to_field(std::int64_t v) noexcept {
  const auto m = static_cast<std::int64_t>(kP);
  return static_cast<std::uint64_t>(((v % m) + m) % m);
}

}  // namespace

std::size_t L0Sampler::levels_for(std::size_t n) noexcept {
  if (n <= 1) return 1;
  return static_cast<std::size_t>(std::bit_width(n - 1)) + 1;  // ceil(log2 n) + 1
}

std::size_t L0Sampler::repetitions_for(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("L0Sampler: delta must lie in (0, 1)");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log2(1.0 / delta) - 1e-12)));
}

double L0Sampler::row_bound(std::size_t n, double delta) {
  return kRowConstant * (std::log2(static_cast<double>(std::max<std::size_t>(n, 1))) + 1.0) *
         (std::log2(1.0 / delta) + 1.0);
}

double L0Sampler::space_bound_bits(std::size_t n, double delta, std::uint64_t magnitude_bound) {
  const double nd = static_cast<double>(std::max<std::size_t>(n, 1));
  return kSpaceConstant * (std::log2(nd) + 1.0) * (std::log2(1.0 / delta) + 1.0) *
         (std::log2(nd * static_cast<double>(magnitude_bound)) + 1.0);
}

L0Sampler::L0Sampler(std::size_t n, double delta, std::uint64_t magnitude_bound, std::uint64_t seed)
    : n_(n),
      delta_num_(0),
      magnitude_bound_(magnitude_bound),
      seed_(seed),
      levels_(levels_for(n)),
      reps_(repetitions_for(delta)) {
  if (n == 0) throw std::invalid_argument("L0Sampler: n must be positive");
  if (magnitude_bound == 0) throw std::invalid_argument("L0Sampler: magnitude bound must be positive");
  // Recovery divides index_sum by count, which must not wrap mod 2^64.
  const long double span = static_cast<long double>(n) * static_cast<long double>(magnitude_bound) *
                           static_cast<long double>(n);
  if (span >= 0x1.0p63L) throw std::invalid_argument("L0Sampler: n^2 * magnitude bound must stay below 2^63");
  delta_num_ = static_cast<std::uint64_t>(std::llround(delta * static_cast<double>(kDeltaDenominator)));
  if (delta_num_ == 0 || delta_num_ >= kDeltaDenominator)
    throw std::invalid_argument("L0Sampler: delta is not representable");
  level_keys_.resize(reps_);
  bases_.resize(reps_);
  for (std::size_t rep = 0; rep < reps_; ++rep) {
    level_keys_[rep] = derive_seed(seed, 0x1e7e1ULL, rep);
    CounterRng rng(derive_seed(seed, 0xf1a9ULL, rep));
    bases_[rep] = 1 + rng.uniform_below(kP - 1);
  }
}

double L0Sampler::delta() const noexcept {
  return static_cast<double>(delta_num_) / static_cast<double>(kDeltaDenominator);
}

std::size_t L0Sampler::level_of(std::size_t rep, std::size_t i) const noexcept {
  const std::uint64_t h = mix64(level_keys_[rep] ^ mix64(static_cast<std::uint64_t>(i)));
  const auto depth = static_cast<std::size_t>(std::countr_zero(h));
  return std::min(depth, levels_ - 1);
}

void L0Sampler::ensure_storage() {
  if (testers_.empty()) testers_.resize(reps_ * levels_);
}

void L0Sampler::update(std::size_t i, std::int64_t delta) {
  if (i >= n_) throw std::out_of_range("L0Sampler::update: index out of range");
  if (delta == 0) return;
  ensure_storage();
  const auto d = static_cast<std::uint64_t>(delta);
  const std::uint64_t weighted = d * static_cast<std::uint64_t>(i);
  const std::uint64_t d_field = to_field(delta);
  for (std::size_t rep = 0; rep < reps_; ++rep) {
    const std::size_t depth = level_of(rep, i);
    const std::uint64_t term = field_mul(d_field, field_pow(bases_[rep], i + 1));
    Tester* row = &testers_[rep * levels_];
    for (std::size_t level = 0; level <= depth; ++level) {
      row[level].count += d;
      row[level].index_sum += weighted;
      row[level].fingerprint = field_add(row[level].fingerprint, term);
    }
  }
}

bool L0Sampler::same_shape(const L0Sampler& other) const noexcept {
  return n_ == other.n_ && delta_num_ == other.delta_num_ && magnitude_bound_ == other.magnitude_bound_ &&
         seed_ == other.seed_ && levels_ == other.levels_ && reps_ == other.reps_;
}

void L0Sampler::merge(const L0Sampler& other) {
  if (!same_shape(other)) throw SketchMismatch("L0Sampler::merge: parameters or seed differ");
  if (other.testers_.empty()) return;
  ensure_storage();
  for (std::size_t t = 0; t < testers_.size(); ++t) {
    testers_[t].count += other.testers_[t].count;
    testers_[t].index_sum += other.testers_[t].index_sum;
    testers_[t].fingerprint = field_add(testers_[t].fingerprint, other.testers_[t].fingerprint);
  }
}

bool L0Sampler::is_empty_state() const noexcept {
  return std::all_of(testers_.begin(), testers_.end(), [](const Tester& t) {
    return t.count == 0 && t.index_sum == 0 && t.fingerprint == 0;
  });
}

bool L0Sampler::recover(std::size_t rep, std::size_t level, std::size_t& index) const {
  const Tester& t = testers_[rep * levels_ + level];
  const auto count = static_cast<std::int64_t>(t.count);
  if (count == 0) return false;
  const auto sum = static_cast<std::int64_t>(t.index_sum);
  if (sum % count != 0) return false;
  const std::int64_t candidate = sum / count;
  if (candidate < 0 || static_cast<std::uint64_t>(candidate) >= n_) return false;
  const auto i = static_cast<std::size_t>(candidate);
  if (level_of(rep, i) < level) return false;
  if (t.fingerprint != field_mul(to_field(count), field_pow(bases_[rep], i + 1))) return false;
  index = i;
  return true;
}

SampleResult L0Sampler::sample() const {
  if (testers_.empty()) return SampleResult::zero();
  bool zero = true;
  for (std::size_t rep = 0; rep < reps_ && zero; ++rep) {
    const Tester& t = testers_[rep * levels_];
    zero = t.count == 0 && t.index_sum == 0 && t.fingerprint == 0;
  }
  if (zero) return SampleResult::zero();
  for (std::size_t level = 0; level < levels_; ++level)
    for (std::size_t rep = 0; rep < reps_; ++rep) {
      std::size_t index = 0;
      if (recover(rep, level, index)) return SampleResult::at(index);
    }
  return SampleResult::fail();
}

std::vector<std::uint64_t> L0Sampler::counters() const {
  std::vector<std::uint64_t> out(row_count(), 0);
  for (std::size_t t = 0; t < testers_.size(); ++t) {
    out[3 * t] = testers_[t].count;
    out[3 * t + 1] = testers_[t].index_sum;
    out[3 * t + 2] = testers_[t].fingerprint;
  }
  return out;
}

L0Sampler::Matrix L0Sampler::export_matrix() const {
  Matrix m;
  m.rows = row_count();
  m.cols = n_;
  m.coefficients.assign(m.rows * m.cols, 0);
  m.modulus.assign(m.rows, 0);
  for (std::size_t rep = 0; rep < reps_; ++rep) {
    for (std::size_t level = 0; level < levels_; ++level) {
      const std::size_t row = 3 * (rep * levels_ + level);
      m.modulus[row + 2] = kP;
      for (std::size_t i = 0; i < n_; ++i) {
        if (level_of(rep, i) < level) continue;
        m.coefficients[row * n_ + i] = 1;
        m.coefficients[(row + 1) * n_ + i] = i;
        m.coefficients[(row + 2) * n_ + i] = field_pow(bases_[rep], i + 1);
      }
    }
  }
  return m;
}

std::vector<std::uint8_t> L0Sampler::serialize() const {
  ByteWriter out;
  out.reserve(serialized_size());
  out.bytes(kMagic);
  out.u64(n_);
  out.u64(delta_num_);
  out.u64(kDeltaDenominator);
  out.u64(magnitude_bound_);
  out.u64(seed_);
  out.u32(static_cast<std::uint32_t>(levels_));
  out.u32(static_cast<std::uint32_t>(reps_));
  for (auto word : counters()) out.u64(word);
  return out.take();
}

L0Sampler L0Sampler::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic(kMagic);
  const auto n = in.u64();
  const auto delta_num = in.u64();
  const auto delta_den = in.u64();
  const auto bound = in.u64();
  const auto seed = in.u64();
  const auto levels = in.u32();
  const auto reps = in.u32();
  if (delta_den == 0 || delta_num == 0 || delta_num >= delta_den)
    throw SerializationError("L0Sampler: bad delta");
  L0Sampler sketch(n, static_cast<double>(delta_num) / static_cast<double>(delta_den), bound, seed);
  if (sketch.delta_num_ != delta_num || delta_den != kDeltaDenominator || sketch.levels_ != levels ||
      sketch.reps_ != reps)
    throw SerializationError("L0Sampler: header is inconsistent");
  std::vector<Tester> testers(sketch.reps_ * sketch.levels_);
  bool any = false;
  for (auto& t : testers) {
    t.count = in.u64();
    t.index_sum = in.u64();
    t.fingerprint = in.u64();
    any = any || t.count != 0 || t.index_sum != 0 || t.fingerprint != 0;
  }
  in.expect_end();
  if (any) sketch.testers_ = std::move(testers);
  return sketch;
}

bool operator==(const L0Sampler& a, const L0Sampler& b) {
  return a.same_shape(b) && a.counters() == b.counters();
}

}  // namespace diamsketch
