#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "diamsketch/diam_sketch.hpp"
#include "diamsketch/metric.hpp"
#include "diamsketch/rational.hpp"

namespace diamsketch {

class LabPreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Directed graph on a vertex set I: edge (a, b), a != b, iff (u_{I[b]}, v_{I[a]})
/// is not an edge of G. Positions a, b index into `vertices`.
class KnowledgeGraph {
 public:
  static KnowledgeGraph from_instance(const BipartiteGraphInstance& g, std::vector<std::size_t> vertices);
  static KnowledgeGraph from_edges(std::size_t t, std::span<const std::pair<std::size_t, std::size_t>> edges);

  std::size_t size() const noexcept { return t_; }
  const std::vector<std::size_t>& vertices() const noexcept { return vertices_; }
  bool has_edge(std::size_t a, std::size_t b) const { return adjacency_.at(a * t_ + b) != 0; }
  std::size_t edge_count() const;

 private:
  std::size_t t_ = 0;
  std::vector<std::size_t> vertices_;
  std::vector<std::uint8_t> adjacency_;
};

/// Draw (x, i) from the hard distribution: x in Z^{2n}, x_i in {0, P}, neighbors
/// j of v_i uniform on {1, ..., P U}, everything else 0.
struct HardSample {
  std::vector<std::int64_t> x;
  std::size_t i = 0;
  std::int64_t p_val = 1;
  std::int64_t u_val = 1'000'000;
};

/// i uniform on I*(G). Throws LabPreconditionError when I* is empty or some
/// i in I* has an empty neighborhood N(v_i).
HardSample sample_hard(const BipartiteGraphInstance& g, std::size_t k, std::int64_t p_val, std::int64_t u_val,
                       std::uint64_t seed);

/// As sample_hard, but i is uniform on {i in I* : N(v_i) nonempty}, for
/// graphs where the nonempty-neighborhood property fails.
HardSample sample_hard_nonempty(const BipartiteGraphInstance& g, std::size_t k, std::int64_t p_val,
                                std::int64_t u_val, std::uint64_t seed);

/// Indices of I*(G) whose neighborhood N(v_i) is nonempty.
std::vector<std::size_t> istar_nonempty(const BipartiteGraphInstance& g, std::size_t k);

/// BFS-exact diam^{2,k}(x) == 1{x_i > 0}. Throws LabPreconditionError when
/// sample.i is not in I*(G) or k < 2.
bool check_index_determines_diam(const BipartiteGraphInstance& g, const HardSample& sample, std::size_t k);

/// s x n integer matrix; file format: `s n`, then s rows of n integers.
struct IntegerSketchMatrix {
  std::size_t s = 0;
  std::size_t n = 0;
  std::vector<std::int64_t> entries;

  std::int64_t at(std::size_t r, std::size_t c) const { return entries.at(r * n + c); }
  std::int64_t entry_bound() const;
  RationalMatrix to_rational() const;

  static IntegerSketchMatrix random(std::size_t s, std::size_t n, std::int64_t bound, std::uint64_t seed);
  static IntegerSketchMatrix read(std::istream& in);
  void write(std::ostream& out) const;
};

/// z with z_i = 1, supp(z) in {i} + N(v_i), T z = 0 over Q, if one exists.
std::optional<RationalVector> fooling_vector_exists(const IntegerSketchMatrix& t, const BipartiteGraphInstance& g,
                                                    std::size_t i);

class FoolingVectorError : public LabPreconditionError {
 public:
  FoolingVectorError(std::size_t index, RationalVector witness);
  std::size_t index() const noexcept { return index_; }
  const RationalVector& witness() const noexcept { return witness_; }

 private:
  std::size_t index_;
  RationalVector witness_;
};

struct DualMatrix {
  RationalMatrix h;       // n x s
  RationalMatrix exact;   // n x n, M = H T
  std::size_t n = 0;
  std::vector<double> numeric;  // n x n, computed independently in doubles

  double at(std::size_t i, std::size_t j) const { return numeric.at(i * n + j); }
};

/// M = H T with h_i = p_i / <p_i, T^(i)> for i in I (p_i the projection of
/// T^(i) off the span of its neighbor columns) and h_i = T^(i) / |T^(i)|^2
/// otherwise. Then M_ii = 1, M_ij = 0 for i in I and (u_j, v_i) in E, rank <= s.
/// Throws FoolingVectorError when some i in I admits a fooling vector.
DualMatrix build_dual_matrix(const IntegerSketchMatrix& t, const BipartiteGraphInstance& g,
                             const std::vector<std::size_t>& indices);

/// Minimum F_2-rank over matrices with unit diagonal and off-diagonal support
/// inside the edge set. At most 5 vertices.
std::size_t minrank_bruteforce_f2(const KnowledgeGraph& kg);
inline constexpr std::size_t kMinrankVertexCap = 5;

struct GraphPropertiesReport {
  std::size_t n = 0;
  std::size_t k = 0;
  double p = 0.0;
  std::size_t istar_size = 0;
  std::size_t min_neighborhood = 0;
  std::size_t max_neighborhood = 0;
  std::size_t max_common_neighborhood = 0;
  std::size_t empty_neighborhoods_in_istar = 0;
  std::size_t edges = 0;
  bool istar_large = false;           // |I*| >= 0.9 n
  bool neighborhoods_large = false;   // min |N(v_i)| >= p n / 2
  bool overlaps_small = false;        // max |N(v_i) & N(v_j)| <= log n * max(n p^2, 1)
  bool istar_neighborhoods_nonempty = false;
};

GraphPropertiesReport verify_graph_properties(const BipartiteGraphInstance& g, std::size_t k);

enum class AdversaryDecider { kOracle, kSketch };

struct AdversaryConfig {
  AdversaryDecider decider = AdversaryDecider::kSketch;
  EstimatorConfig estimator;
  std::int64_t p_val = 1;
  std::int64_t u_val = 1'000'000;
};

struct AdversaryResult {
  std::size_t trials = 0;
  std::size_t failures = 0;
  double rate() const noexcept { return static_cast<double>(failures) / static_cast<double>(trials); }
};

/// Runs the decider on `trials` draws from the hard distribution and counts
/// answers that contradict 1{x_i > 0}. The sketch decider answers 1{eta > 2}.
AdversaryResult adversary_eval(const AdversaryConfig& config, const BipartiteGraphInstance& g, std::size_t k,
                               std::size_t trials, std::uint64_t seed);

}  // namespace diamsketch
