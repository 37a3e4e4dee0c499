#include "diamsketch/metric.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "diamsketch/rng.hpp"

namespace diamsketch {

// ---------------------------------------------------------------------------
// Graph

void Graph::add_edge(std::size_t u, std::size_t v) {
  if (u >= size() || v >= size()) throw std::out_of_range("Graph::add_edge: vertex out of range");
  if (u == v || has_edge(u, v)) return;
  adjacency_[u].push_back(static_cast<std::uint32_t>(v));
  adjacency_[v].push_back(static_cast<std::uint32_t>(u));
  ++edges_;
}

bool Graph::has_edge(std::size_t u, std::size_t v) const {
  const auto& row = adjacency_.at(u);
  return std::find(row.begin(), row.end(), static_cast<std::uint32_t>(v)) != row.end();
}

std::vector<std::uint32_t> Graph::bfs(std::size_t source) const {
  std::vector<std::uint32_t> dist(size(), kUnreachable);
  std::vector<std::uint32_t> frontier{static_cast<std::uint32_t>(source)};
  dist.at(source) = 0;
  std::uint32_t hops = 0;
  while (!frontier.empty()) {
    ++hops;
    std::vector<std::uint32_t> next;
    for (auto v : frontier) {
      for (auto w : adjacency_[v]) {
        if (dist[w] == kUnreachable) {
          dist[w] = hops;
          next.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

// ---------------------------------------------------------------------------
// FiniteMetric

struct FiniteMetric::Storage {
  std::size_t n = 0;
  std::vector<double> dense;  // empty when graph-backed
  std::optional<Graph> graph;
  mutable std::vector<std::vector<std::uint32_t>> rows;
  mutable std::unique_ptr<std::once_flag[]> row_flags;

  const std::vector<std::uint32_t>& row(std::size_t source) const {
    std::call_once(row_flags[source], [&] { rows[source] = graph->bfs(source); });
    return rows[source];
  }
};

FiniteMetric FiniteMetric::dense(std::size_t n, std::vector<double> distances) {
  if (distances.size() != n * n) throw std::invalid_argument("FiniteMetric::dense: size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (distances[i * n + i] != 0.0) throw std::invalid_argument("FiniteMetric::dense: nonzero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      const double d = distances[i * n + j];
      if (std::isnan(d) || d < 0.0) throw std::invalid_argument("FiniteMetric::dense: negative or NaN distance");
      if (d != distances[j * n + i]) throw std::invalid_argument("FiniteMetric::dense: asymmetric matrix");
    }
  }
  auto storage = std::make_shared<Storage>();
  storage->n = n;
  storage->dense = std::move(distances);
  return FiniteMetric(std::move(storage));
}

FiniteMetric FiniteMetric::from_graph(Graph g) {
  auto storage = std::make_shared<Storage>();
  storage->n = g.size();
  storage->rows.resize(g.size());
  storage->row_flags = std::make_unique<std::once_flag[]>(g.size());
  storage->graph.emplace(std::move(g));
  return FiniteMetric(std::move(storage));
}

std::size_t FiniteMetric::size() const noexcept { return storage_->n; }

bool FiniteMetric::is_graph_backed() const noexcept { return storage_->graph.has_value(); }

const Graph* FiniteMetric::graph() const noexcept {
  return storage_->graph ? &*storage_->graph : nullptr;
}

double FiniteMetric::distance(std::size_t i, std::size_t j) const {
  const std::size_t n = storage_->n;
  if (i >= n || j >= n) throw std::out_of_range("FiniteMetric::distance: index out of range");
  if (!storage_->graph) return storage_->dense[i * n + j];
  const auto hops = storage_->row(i)[j];
  return hops == kUnreachable ? kInfinity : static_cast<double>(hops);
}

double FiniteMetric::max_finite_distance() const {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j) {
      const double d = distance(i, j);
      if (d != kInfinity) best = std::max(best, d);
    }
  return best;
}

double FiniteMetric::min_positive_distance() const {
  double best = kInfinity;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j) {
      const double d = distance(i, j);
      if (d > 0.0) best = std::min(best, d);
    }
  return best == kInfinity ? 0.0 : best;
}

bool FiniteMetric::all_finite() const {
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j)
      if (distance(i, j) == kInfinity) return false;
  return true;
}

DenseMetricExport FiniteMetric::dense_export() const {
  DenseMetricExport out;
  out.n = size();
  out.values.resize(out.n * out.n);
  out.connected.resize(out.n * out.n);
  out.sentinel = 2.0 * max_finite_distance() + 1.0;
  for (std::size_t i = 0; i < out.n; ++i) {
    for (std::size_t j = 0; j < out.n; ++j) {
      const double d = distance(i, j);
      const bool finite = d != kInfinity;
      out.connected[i * out.n + j] = finite ? 1 : 0;
      out.values[i * out.n + j] = finite ? d : out.sentinel;
      out.fully_connected = out.fully_connected && finite;
    }
  }
  return out;
}

FiniteMetric FiniteMetric::finite_closure() const {
  auto exported = dense_export();
  return dense(exported.n, std::move(exported.values));
}

// ---------------------------------------------------------------------------
// FrequencyVector

FrequencyVector::FrequencyVector(std::size_t n, std::int64_t magnitude_bound)
    : entries_(n, 0), bound_(magnitude_bound) {
  if (magnitude_bound <= 0) throw std::invalid_argument("FrequencyVector: magnitude bound must be positive");
}

FrequencyVector FrequencyVector::from_entries(std::vector<std::int64_t> entries,
                                              std::int64_t magnitude_bound) {
  FrequencyVector x(0, magnitude_bound);
  for (auto e : entries)
    if (e > magnitude_bound || e < -magnitude_bound)
      throw std::overflow_error("FrequencyVector: entry exceeds magnitude bound");
  x.entries_ = std::move(entries);
  return x;
}

void FrequencyVector::update(std::size_t i, std::int64_t delta) {
  if (i >= entries_.size()) throw std::out_of_range("FrequencyVector::update: index out of range");
  std::int64_t next = 0;
  if (__builtin_add_overflow(entries_[i], delta, &next) || next > bound_ || next < -bound_)
    throw std::overflow_error("FrequencyVector::update: entry would exceed magnitude bound");
  entries_[i] = next;
}

std::vector<std::size_t> FrequencyVector::support() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i] != 0) out.push_back(i);
  return out;
}

bool FrequencyVector::nonnegative() const {
  return std::all_of(entries_.begin(), entries_.end(), [](auto e) { return e >= 0; });
}

bool FrequencyVector::is_zero() const {
  return std::all_of(entries_.begin(), entries_.end(), [](auto e) { return e == 0; });
}

// ---------------------------------------------------------------------------
// Bipartite instances

std::vector<std::size_t> BipartiteGraphInstance::neighborhood(std::size_t j) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (has_edge(i, j)) out.push_back(i);
  return out;
}

std::size_t BipartiteGraphInstance::edge_count() const {
  return static_cast<std::size_t>(std::count(adjacency.begin(), adjacency.end(), std::uint8_t{1}));
}

Graph BipartiteGraphInstance::to_graph() const {
  Graph g(2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (has_edge(i, j)) g.add_edge(i, n + j);
  return g;
}

BipartiteGraphInstance gen_bipartite(std::size_t n, double p, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("gen_bipartite: n must be positive");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gen_bipartite: p must lie in (0, 1)");
  BipartiteGraphInstance g{n, p, seed, std::vector<std::uint8_t>(n * n, 0)};
  const CounterRng rng(derive_seed(seed, 0xb1a9ULL));
  for (std::size_t e = 0; e < n * n; ++e)
    g.adjacency[e] = to_unit_interval(rng.at(e)) < p ? 1 : 0;
  return g;
}

BipartiteGraphInstance bipartite_from_edges(std::size_t n,
                                            std::span<const std::pair<std::size_t, std::size_t>> edges,
                                            double p, std::uint64_t seed) {
  BipartiteGraphInstance g{n, p, seed, std::vector<std::uint8_t>(n * n, 0)};
  for (auto [i, j] : edges) {
    if (i >= n || j >= n) throw std::out_of_range("bipartite_from_edges: endpoint out of range");
    g.adjacency[i * n + j] = 1;
  }
  return g;
}

double auto_edge_probability(std::size_t n, std::size_t k) {
  if (n < 2 || k < 1) throw std::invalid_argument("auto_edge_probability: need n >= 2 and k >= 1");
  const double nd = static_cast<double>(n);
  const double exponent = -1.0 + 1.0 / (2.0 * static_cast<double>(k) - 1.0);
  return std::min(std::pow(nd, exponent) / std::log(nd), 0.5);
}

Graph gen_connected_graph(std::size_t n, double extra_p, std::uint64_t seed) {
  Graph g(n);
  CounterRng rng(derive_seed(seed, 0x7ee5ULL));
  for (std::size_t v = 1; v < n; ++v) g.add_edge(v, rng.uniform_below(v));
  const CounterRng extra(derive_seed(seed, 0xe4a5ULL));
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (to_unit_interval(extra.at(u * n + v)) < extra_p) g.add_edge(u, v);
  return g;
}

FiniteMetric shortest_path_metric(const BipartiteGraphInstance& g) {
  return FiniteMetric::from_graph(g.to_graph());
}

// ---------------------------------------------------------------------------
// Oracles

namespace {

bool has_negative(std::span<const std::int64_t> x) {
  return std::any_of(x.begin(), x.end(), [](auto e) { return e < 0; });
}

void check_dimension(const FiniteMetric& metric, std::span<const std::int64_t> x) {
  if (x.size() != metric.size()) throw std::invalid_argument("oracle: vector length differs from metric size");
}

}  // namespace

std::optional<double> diam_oracle(const FiniteMetric& metric, std::span<const std::int64_t> x) {
  check_dimension(metric, x);
  if (has_negative(x)) return std::nullopt;
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0) support.push_back(i);
  double best = 0.0;
  for (std::size_t a = 0; a < support.size(); ++a)
    for (std::size_t b = a + 1; b < support.size(); ++b)
      best = std::max(best, metric.distance(support[a], support[b]));
  return best;
}

std::optional<double> afn_oracle(const FiniteMetric& metric, std::span<const std::int64_t> x,
                                 std::size_t q) {
  check_dimension(metric, x);
  if (q >= metric.size()) throw std::out_of_range("afn_oracle: query index out of range");
  if (has_negative(x)) return std::nullopt;
  double best = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0) best = std::max(best, metric.distance(q, i));
  return best;
}

Decision diam_decision_oracle(const FiniteMetric& metric, std::span<const std::int64_t> x,
                              double r, double c) {
  if (!(c > 1.0)) throw std::invalid_argument("diam_decision_oracle: c must exceed 1");
  if (!(r > 0.0)) throw std::invalid_argument("diam_decision_oracle: r must be positive");
  const auto diam = diam_oracle(metric, x);
  if (!diam) return Decision::kStar;
  if (*diam >= c * r) return Decision::kOne;
  if (*diam <= r) return Decision::kZero;
  return Decision::kStar;
}

std::vector<std::size_t> istar(const BipartiteGraphInstance& g, std::size_t k) {
  if (k < 1) throw std::invalid_argument("istar: k must be at least 1");
  const Graph graph = g.to_graph();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.n; ++i) {
    const auto hops = graph.bfs(i)[g.n + i];
    if (hops == kUnreachable || hops >= 2 * k + 1) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// File formats

void write_graph_file(std::ostream& out, const BipartiteGraphInstance& g) {
  std::ostringstream p;
  p.precision(17);
  p << g.p;
  out << g.n << ' ' << p.str() << ' ' << g.seed << '\n';
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j)
      if (g.has_edge(i, j)) out << i << ' ' << j << '\n';
}

BipartiteGraphInstance read_graph_file(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("graph file line " + std::to_string(line_no) + ": " + what);
  };
  BipartiteGraphInstance g;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    if (!have_header) {
      if (!(fields >> g.n >> g.p >> g.seed)) fail("expected header `n p seed`");
      g.adjacency.assign(g.n * g.n, 0);
      have_header = true;
      continue;
    }
    std::size_t i = 0;
    std::size_t j = 0;
    if (!(fields >> i >> j)) fail("expected edge `i j`");
    std::string extra;
    if (fields >> extra) fail("trailing tokens");
    if (i >= g.n || j >= g.n) fail("edge endpoint out of range");
    g.adjacency[i * g.n + j] = 1;
  }
  if (!have_header) throw std::runtime_error("graph file: missing header");
  return g;
}

void write_metric_csv(std::ostream& out, const FiniteMetric& metric) {
  const auto exported = metric.dense_export();
  std::ostringstream row;
  row.precision(17);
  for (std::size_t i = 0; i < exported.n; ++i) {
    row.str("");
    for (std::size_t j = 0; j < exported.n; ++j) {
      if (j > 0) row << ',';
      row << exported.at(i, j);
    }
    out << row.str() << '\n';
  }
}

FiniteMetric read_metric_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t count = 0;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("metric csv line " + std::to_string(rows + 1) + ": bad number");
      }
      ++count;
    }
    if (rows == 0) cols = count;
    if (count != cols) throw std::runtime_error("metric csv line " + std::to_string(rows + 1) + ": ragged row");
    ++rows;
  }
  if (rows != cols) throw std::runtime_error("metric csv: matrix is not square");
  return FiniteMetric::dense(rows, std::move(values));
}

}  // namespace diamsketch
