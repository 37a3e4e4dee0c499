#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "diamsketch/metric.hpp"

namespace diamsketch {

struct StreamUpdate {
  std::size_t index = 0;
  std::int64_t delta = 1;  // +1 or -1 in stream files

  friend bool operator==(const StreamUpdate&, const StreamUpdate&) = default;
};

class StreamParseError : public std::runtime_error {
 public:
  StreamParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// One update per line: `+ i` or `- i`. Blank lines and lines starting with
/// '#' are skipped. Indices >= n (when given) are rejected with the line number.
std::vector<StreamUpdate> read_stream(std::istream& in, std::optional<std::size_t> n = std::nullopt);
void write_stream(std::ostream& out, std::span<const StreamUpdate> stream);

FrequencyVector apply_stream(std::size_t n, std::span<const StreamUpdate> stream,
                             std::int64_t magnitude_bound = kDefaultMagnitudeBound);

/// A shuffled +-1 stream whose final vector is `target` (nonnegative). Each of
/// `churn` extra indices is inserted and later deleted, so every prefix stays
/// nonnegative.
std::vector<StreamUpdate> generate_stream(const FrequencyVector& target, std::size_t churn, std::uint64_t seed);

/// Random nonnegative vector with a support of `support` distinct indices and
/// multiplicities in [1, max_multiplicity].
FrequencyVector random_support_vector(std::size_t n, std::size_t support, std::int64_t max_multiplicity,
                                      std::uint64_t seed);

struct TrialRow {
  std::size_t trial = 0;
  std::string answer;
  std::optional<std::size_t> witness;
  double ms = 0.0;
};

/// CSV `trial,answer,witness,ms`; an absent witness is an empty field.
void write_results_csv(std::ostream& out, std::span<const TrialRow> rows);

/// Insertion-only 2-approximation: max distance from the first inserted
/// point to any inserted point. Throws std::invalid_argument on a deletion.
double insertion_only_baseline(const FiniteMetric& metric, std::span<const StreamUpdate> stream);

}  // namespace diamsketch
