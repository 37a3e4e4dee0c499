#include "diamsketch/stream_io.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <utility>

#include "diamsketch/rng.hpp"

namespace diamsketch {

StreamParseError::StreamParseError(std::size_t line, const std::string& what)
    : std::runtime_error("stream line " + std::to_string(line) + ": " + what), line_(line) {}

std::vector<StreamUpdate> read_stream(std::istream& in, std::optional<std::size_t> n) {
  std::vector<StreamUpdate> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const char sign = line[first];
    if (sign != '+' && sign != '-') throw StreamParseError(line_no, "expected '+' or '-'");
    const auto start = line.find_first_not_of(" \t", first + 1);
    if (start == std::string::npos || start == first + 1) throw StreamParseError(line_no, "expected '<sign> <index>'");
    auto end = line.find_last_not_of(" \t");
    std::size_t index = 0;
    const char* b = line.data() + start;
    const char* e = line.data() + end + 1;
    auto [ptr, ec] = std::from_chars(b, e, index);
    if (ec != std::errc() || ptr != e) throw StreamParseError(line_no, "bad index '" + std::string(b, e) + "'");
    if (n && index >= *n) throw StreamParseError(line_no, "index " + std::to_string(index) + " out of range");
    out.push_back({index, sign == '+' ? 1 : -1});
  }
  return out;
}

void write_stream(std::ostream& out, std::span<const StreamUpdate> stream) {
  for (const auto& u : stream) {
    if (u.delta != 1 && u.delta != -1) throw std::invalid_argument("write_stream: updates must be +-1");
    out << (u.delta > 0 ? '+' : '-') << ' ' << u.index << '\n';
  }
}

FrequencyVector apply_stream(std::size_t n, std::span<const StreamUpdate> stream, std::int64_t magnitude_bound) {
  FrequencyVector x(n, magnitude_bound);
  for (const auto& u : stream) x.update(u.index, u.delta);
  return x;
}

std::vector<StreamUpdate> generate_stream(const FrequencyVector& target, std::size_t churn, std::uint64_t seed) {
  if (!target.nonnegative()) throw std::invalid_argument("generate_stream: target must be nonnegative");
  const std::size_t n = target.size();
  std::vector<StreamUpdate> events;
  for (std::size_t i = 0; i < n; ++i)
    for (std::int64_t c = 0; c < target[i]; ++c) events.push_back({i, 1});
  CounterRng rng(derive_seed(seed, 0x57eaULL));
  if (n > 0)
    for (std::size_t c = 0; c < churn; ++c) {
      const std::size_t j = rng.uniform_below(n);
      events.push_back({j, 1});
      events.push_back({j, -1});
    }
  for (std::size_t a = events.size(); a > 1; --a) std::swap(events[a - 1], events[rng.uniform_below(a)]);
  // Keep every prefix nonnegative: a deletion is moved after an insertion of
  // the same index when it would otherwise run ahead.
  std::vector<std::int64_t> running(n, 0);
  std::vector<StreamUpdate> out;
  out.reserve(events.size());
  std::vector<std::size_t> waiting(n, 0);
  for (const auto& u : events) {
    if (u.delta > 0) {
      out.push_back(u);
      ++running[u.index];
      while (waiting[u.index] > 0 && running[u.index] > 0) {
        out.push_back({u.index, -1});
        --running[u.index];
        --waiting[u.index];
      }
    } else if (running[u.index] > 0) {
      out.push_back(u);
      --running[u.index];
    } else {
      ++waiting[u.index];
    }
  }
  return out;
}

FrequencyVector random_support_vector(std::size_t n, std::size_t support, std::int64_t max_multiplicity,
                                      std::uint64_t seed) {
  if (support > n) throw std::invalid_argument("random_support_vector: support larger than n");
  if (max_multiplicity < 1) throw std::invalid_argument("random_support_vector: multiplicity must be positive");
  CounterRng rng(derive_seed(seed, 0x5099ULL));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t a = 0; a < support; ++a) std::swap(idx[a], idx[a + rng.uniform_below(n - a)]);
  FrequencyVector x(n);
  for (std::size_t a = 0; a < support; ++a) x.update(idx[a], rng.uniform_int(1, max_multiplicity));
  return x;
}

void write_results_csv(std::ostream& out, std::span<const TrialRow> rows) {
  out << "trial,answer,witness,ms\n";
  const auto old = out.precision(6);
  for (const auto& r : rows) {
    out << r.trial << ',' << r.answer << ',';
    if (r.witness) out << *r.witness;
    out << ',' << r.ms << '\n';
  }
  out.precision(old);
}

double insertion_only_baseline(const FiniteMetric& metric, std::span<const StreamUpdate> stream) {
  std::optional<std::size_t> first;
  double best = 0.0;
  for (const auto& u : stream) {
    if (u.delta < 0) throw std::invalid_argument("insertion_only_baseline: deletions are not supported");
    if (u.index >= metric.size()) throw std::out_of_range("insertion_only_baseline: index out of range");
    if (!first) first = u.index;
    best = std::max(best, metric.distance(*first, u.index));
  }
  return best;
}

}  // namespace diamsketch
