#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace diamsketch {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();
inline constexpr std::int64_t kDefaultMagnitudeBound = std::int64_t{1} << 31;

/// Undirected, unweighted simple graph on vertices 0..n-1.
class Graph {
 public:
  explicit Graph(std::size_t n) : adjacency_(n) {}

  /// Adds {u, v}. Self loops and repeated edges are ignored.
  void add_edge(std::size_t u, std::size_t v);
  bool has_edge(std::size_t u, std::size_t v) const;

  std::size_t size() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edges_; }
  std::span<const std::uint32_t> neighbors(std::size_t v) const { return adjacency_.at(v); }

  /// Hop distances from `source`; kUnreachable for other components.
  std::vector<std::uint32_t> bfs(std::size_t source) const;

 private:
  std::vector<std::vector<std::uint32_t>> adjacency_;
  std::size_t edges_ = 0;
};

/// Dense export of a metric. Disconnected pairs carry a finite sentinel
/// `2 * max_finite + 1` and are flagged in `connected`.
struct DenseMetricExport {
  std::size_t n = 0;
  std::vector<double> values;      // row-major n x n
  std::vector<std::uint8_t> connected;  // row-major n x n, 1 if finite
  double sentinel = 1.0;
  bool fully_connected = true;

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

/// An n-point metric with exact distance access. Immutable and cheap to copy
/// (shared storage). Graph-backed metrics fill a per-source BFS cache lazily;
/// the fill is synchronized, so concurrent readers are safe.
class FiniteMetric {
 public:
  /// Row-major n x n matrix. Validates zero diagonal, symmetry and
  /// nonnegativity; infinity marks disconnected pairs.
  static FiniteMetric dense(std::size_t n, std::vector<double> distances);

  /// Shortest-path (hop count) metric of `g`.
  static FiniteMetric from_graph(Graph g);

  std::size_t size() const noexcept;
  double distance(std::size_t i, std::size_t j) const;
  bool connected(std::size_t i, std::size_t j) const { return distance(i, j) != kInfinity; }
  bool is_graph_backed() const noexcept;

  /// Largest finite distance (0 for n <= 1).
  double max_finite_distance() const;
  /// Smallest positive distance; 0 when no pair of distinct points exists.
  double min_positive_distance() const;
  bool all_finite() const;

  DenseMetricExport dense_export() const;
  /// Dense metric where infinite distances are replaced by the sentinel.
  /// Still a metric: the sentinel is at least half of every finite distance.
  FiniteMetric finite_closure() const;

  /// Underlying graph, if graph-backed.
  const Graph* graph() const noexcept;

 private:
  struct Storage;
  explicit FiniteMetric(std::shared_ptr<const Storage> storage) : storage_(std::move(storage)) {}
  std::shared_ptr<const Storage> storage_;
};

/// Integer vector x in Z^n updated by +-delta, with |x_i| <= magnitude bound.
class FrequencyVector {
 public:
  explicit FrequencyVector(std::size_t n, std::int64_t magnitude_bound = kDefaultMagnitudeBound);
  static FrequencyVector from_entries(std::vector<std::int64_t> entries,
                                      std::int64_t magnitude_bound = kDefaultMagnitudeBound);

  /// Throws std::out_of_range for bad indices and std::overflow_error when the
  /// entry would leave [-m, m]; the vector is unchanged in both cases.
  void update(std::size_t i, std::int64_t delta);

  std::int64_t operator[](std::size_t i) const { return entries_.at(i); }
  std::size_t size() const noexcept { return entries_.size(); }
  std::int64_t magnitude_bound() const noexcept { return bound_; }
  std::span<const std::int64_t> entries() const noexcept { return entries_; }
  std::vector<std::size_t> support() const;
  bool nonnegative() const;
  bool is_zero() const;

  friend bool operator==(const FrequencyVector&, const FrequencyVector&) = default;

 private:
  std::vector<std::int64_t> entries_;
  std::int64_t bound_;
};

/// Random bipartite graph G(n, n, p). adjacency[i * n + j] is the edge (u_i, v_j).
/// In the associated 2n-point metric, u_i is point i and v_j is point n + j.
struct BipartiteGraphInstance {
  std::size_t n = 0;
  double p = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> adjacency;

  bool has_edge(std::size_t i, std::size_t j) const { return adjacency.at(i * n + j) != 0; }
  /// N(v_j) as U-side indices, ascending.
  std::vector<std::size_t> neighborhood(std::size_t j) const;
  std::size_t edge_count() const;
  Graph to_graph() const;

  friend bool operator==(const BipartiteGraphInstance&, const BipartiteGraphInstance&) = default;
};

/// Each of the n^2 edges is present independently with probability p; edge
/// (i, j) depends only on (seed, i * n + j).
BipartiteGraphInstance gen_bipartite(std::size_t n, double p, std::uint64_t seed);

/// Builds an instance from an explicit edge list (u-index, v-index).
BipartiteGraphInstance bipartite_from_edges(std::size_t n,
                                            std::span<const std::pair<std::size_t, std::size_t>> edges,
                                            double p = 0.5, std::uint64_t seed = 0);

/// p = n^(-1 + 1/(2k-1)) / ln n, the edge density that makes most u_i, v_i
/// pairs at distance at least 2k+1. Capped at 1/2 for tiny n.
double auto_edge_probability(std::size_t n, std::size_t k);

/// Random connected graph: a random recursive tree plus independent extra
/// edges with probability extra_p.
Graph gen_connected_graph(std::size_t n, double extra_p, std::uint64_t seed);

FiniteMetric shortest_path_metric(const BipartiteGraphInstance& g);

/// Exact max pairwise distance over supp(x); 0 when |supp(x)| <= 1.
/// nullopt when x has a negative entry.
std::optional<double> diam_oracle(const FiniteMetric& metric, std::span<const std::int64_t> x);

/// Exact max distance from q over supp(x); 0 when x = 0. nullopt when x has
/// a negative entry.
std::optional<double> afn_oracle(const FiniteMetric& metric, std::span<const std::int64_t> x,
                                 std::size_t q);

enum class Decision { kZero, kOne, kStar };

/// 1 if diam >= c r, 0 if diam <= r, * otherwise (including negative entries).
Decision diam_decision_oracle(const FiniteMetric& metric, std::span<const std::int64_t> x,
                              double r, double c);

/// {i : d(u_i, v_i) >= 2k + 1}, ascending, with disconnected pairs included.
std::vector<std::size_t> istar(const BipartiteGraphInstance& g, std::size_t k);

/// Graph file: header `n p seed`, then one `i j` line per edge (u_i, v_j).
void write_graph_file(std::ostream& out, const BipartiteGraphInstance& g);
BipartiteGraphInstance read_graph_file(std::istream& in);

/// CSV of the dense export (sentinel for disconnected pairs).
void write_metric_csv(std::ostream& out, const FiniteMetric& metric);
FiniteMetric read_metric_csv(std::istream& in);

}  // namespace diamsketch
