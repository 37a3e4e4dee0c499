#include "harness.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "diamsketch/rng.hpp"
#include "diamsketch/stream_io.hpp"

namespace diamsketch::harness {

std::uint64_t resolve_seed(std::uint64_t fallback) {
  const char* env = std::getenv(kSeedEnv);
  if (!env || !*env) return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 0);
  if (*end != '\0') throw std::invalid_argument(std::string(kSeedEnv) + " is not an integer");
  return v;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json inst = {{"generator", c.instance.generator},
                         {"n", c.instance.n},
                         {"extra_p", c.instance.extra_p},
                         {"k", c.instance.k},
                         {"path", c.instance.path}};
  inst["p"] = c.instance.p ? nlohmann::json(*c.instance.p) : nlohmann::json("auto");
  j = {{"command", c.command},
       {"instance", inst},
       {"sketch",
        {{"c", c.sketch.c_values},
         {"delta", c.sketch.delta},
         {"oversample", c.sketch.oversample},
         {"max_attempts", c.sketch.max_attempts}}},
       {"seed", c.seed},
       {"trials", c.trials},
       {"support_min", c.support_min},
       {"support_max", c.support_max},
       {"threads", c.threads},
       {"output", c.output}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  ExperimentConfig d;
  c.command = j.value("command", d.command);
  if (j.contains("instance")) {
    const auto& i = j.at("instance");
    c.instance.generator = i.value("generator", d.instance.generator);
    c.instance.n = i.value("n", d.instance.n);
    c.instance.extra_p = i.value("extra_p", d.instance.extra_p);
    c.instance.k = i.value("k", d.instance.k);
    c.instance.path = i.value("path", d.instance.path);
    if (i.contains("p") && i.at("p").is_number()) c.instance.p = i.at("p").get<double>();
  }
  if (j.contains("sketch")) {
    const auto& s = j.at("sketch");
    c.sketch.c_values = s.value("c", d.sketch.c_values);
    c.sketch.delta = s.value("delta", d.sketch.delta);
    c.sketch.oversample = s.value("oversample", d.sketch.oversample);
    c.sketch.max_attempts = s.value("max_attempts", d.sketch.max_attempts);
  }
  c.seed = j.value("seed", d.seed);
  c.trials = j.value("trials", d.trials);
  c.support_min = j.value("support_min", d.support_min);
  c.support_max = j.value("support_max", d.support_max);
  c.threads = j.value("threads", d.threads);
  c.output = j.value("output", d.output);
}

FiniteMetric load_metric_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream text;
  text << in.rdbuf();
  const std::string& s = text.str();
  std::istringstream body(s);
  if (s.substr(0, s.find('\n')).find(',') != std::string::npos) return read_metric_csv(body);
  return shortest_path_metric(read_graph_file(body));
}

FiniteMetric make_instance(const InstanceSpec& spec, std::uint64_t seed) {
  if (spec.generator == "connected") return FiniteMetric::from_graph(gen_connected_graph(spec.n, spec.extra_p, seed));
  if (spec.generator == "bipartite") {
    const double p = spec.p ? *spec.p : auto_edge_probability(spec.n, spec.k);
    return shortest_path_metric(gen_bipartite(spec.n, p, seed));
  }
  if (spec.generator == "file") return load_metric_file(spec.path);
  throw std::invalid_argument("unknown instance generator '" + spec.generator + "'");
}

TrialOutcome run_estimate_trial(const ExperimentConfig& config, double c, std::size_t trial) {
  if (config.support_min < 2 || config.support_max < config.support_min)
    throw std::invalid_argument("support range must satisfy 2 <= min <= max");
  const std::uint64_t base = derive_seed(config.seed, trial);
  const FiniteMetric metric = make_instance(config.instance, derive_seed(base, 0x3e7ULL));
  EstimatorConfig ec;
  ec.c = c;
  ec.delta = config.sketch.delta;
  ec.seed = derive_seed(base, 0xe57ULL);
  ec.oversample = config.sketch.oversample;
  ec.max_attempts = config.sketch.max_attempts;
  const EstimatorContext ctx = EstimatorContext::build(metric, ec);

  CounterRng rng(derive_seed(base, 0x5a5ULL));
  const std::size_t span = config.support_max - config.support_min + 1;
  const std::size_t support = std::min(metric.size(), config.support_min + rng.uniform_below(span));
  const FrequencyVector x = random_support_vector(metric.size(), support, 3, derive_seed(base, 0xf7eULL));

  TrialOutcome out;
  out.support = support;
  out.diameter = *diam_oracle(metric, x.entries());
  out.eta = estimate_by_replay(ctx, x.entries(), true).eta;
  out.success = out.diameter / c < out.eta && out.eta <= out.diameter;
  const SpaceReport space = plan_space(ctx);
  out.rows = space.total_rows;
  out.bytes = space.total_bytes;
  out.dimension = space.embedding_dimension;
  out.grid = space.grid_size;
  return out;
}

std::vector<TradeoffRow> run_tradeoff(const ExperimentConfig& config) {
  std::vector<TradeoffRow> rows;
  for (double c : config.sketch.c_values) {
    const EstimatorPlan plan = EstimatorPlan::make(c, config.sketch.delta, 1.0, 2.0);
    std::vector<TrialOutcome> outcomes(config.trials);
    parallel_for(config.trials, config.threads, [&](std::size_t t) { outcomes[t] = run_estimate_trial(config, c, t); });
    TradeoffRow row;
    row.c = c;
    row.q = plan.q;
    row.epsilon = plan.epsilon;
    row.trials = config.trials;
    for (const auto& o : outcomes) {
      row.successes += o.success;
      row.rows = std::max(row.rows, o.rows);
      row.bytes = std::max(row.bytes, o.bytes);
      row.dimension = std::max(row.dimension, o.dimension);
      row.grid = std::max(row.grid, o.grid);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffRow>& rows) {
  out << "c,q,epsilon,dimension,grid,rows,bytes,trials,success_rate\n";
  for (const auto& r : rows)
    out << r.c << ',' << r.q << ',' << r.epsilon << ',' << r.dimension << ',' << r.grid << ',' << r.rows << ','
        << r.bytes << ',' << r.trials << ',' << r.success_rate() << '\n';
}

int run(const ExperimentConfig& config, std::ostream& out) {
  if (config.command == "tradeoff") {
    write_tradeoff_csv(out, run_tradeoff(config));
    return 0;
  }
  throw std::invalid_argument("unknown experiment command '" + config.command + "'");
}

}  // namespace diamsketch::harness
