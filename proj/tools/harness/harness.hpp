#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "diamsketch/diam_sketch.hpp"
#include "diamsketch/metric.hpp"

namespace diamsketch::harness {

inline constexpr const char* kSeedEnv = "DIAMSKETCH_SEED";

/// The seed from DIAMSKETCH_SEED when set, else `fallback`.
std::uint64_t resolve_seed(std::uint64_t fallback);

struct InstanceSpec {
  std::string generator = "connected";  // connected | bipartite | file
  std::size_t n = 128;
  double extra_p = 0.02;                 // connected graphs
  std::optional<double> p;               // bipartite; nullopt means auto
  std::size_t k = 2;
  std::string path;                      // generator == file
};

struct SketchSpec {
  std::vector<double> c_values{10.0};
  double delta = 0.1;
  double oversample = 1.0;
  unsigned max_attempts = 3;
};

struct ExperimentConfig {
  std::string command = "tradeoff";
  InstanceSpec instance;
  SketchSpec sketch;
  std::uint64_t seed = 1;
  std::size_t trials = 50;
  std::size_t support_min = 2;
  std::size_t support_max = 16;
  unsigned threads = 1;
  std::string output;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Runs f(0..count-1) on up to `threads` workers. The first exception is
/// rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& f) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

/// Graph file (`n p seed` header, bipartite metric) or dense metric CSV,
/// told apart by the first line.
FiniteMetric load_metric_file(const std::string& path);

/// Metric for trial `trial` of an experiment, derived from the config seed.
FiniteMetric make_instance(const InstanceSpec& spec, std::uint64_t seed);

struct TradeoffRow {
  double c = 0.0;
  unsigned q = 0;
  double epsilon = 0.0;
  std::size_t dimension = 0;
  std::size_t grid = 0;
  std::size_t rows = 0;
  std::size_t bytes = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;

  double success_rate() const noexcept {
    return trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  }
};

struct TrialOutcome {
  double diameter = 0.0;
  double eta = 0.0;
  std::size_t support = 0;
  bool success = false;
  std::size_t rows = 0;
  std::size_t bytes = 0;
  std::size_t dimension = 0;
  std::size_t grid = 0;
};

/// One end-to-end trial: random metric, random support of size in
/// [support_min, support_max], eta by replay; success iff diam / c < eta <= diam.
TrialOutcome run_estimate_trial(const ExperimentConfig& config, double c, std::size_t trial);

/// One row per c: rows and bytes are the maxima over trials.
std::vector<TradeoffRow> run_tradeoff(const ExperimentConfig& config);
void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffRow>& rows);

/// Executes config.command ("tradeoff") and writes CSV to `out`. Returns an exit code.
int run(const ExperimentConfig& config, std::ostream& out);

}  // namespace diamsketch::harness
