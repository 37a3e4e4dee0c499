#include "diamsketch/lowerbound_lab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "diamsketch/rng.hpp"

namespace diamsketch {

namespace {

/// N(v_i) as U-side indices.
std::vector<std::size_t> neighbors_of(const BipartiteGraphInstance& g, std::size_t i) { return g.neighborhood(i); }

HardSample draw(const BipartiteGraphInstance& g, const std::vector<std::size_t>& pool, std::int64_t p_val,
                std::int64_t u_val, std::uint64_t seed) {
  if (p_val < 1 || u_val < 1) throw std::invalid_argument("sample_hard: P and U must be positive");
  if (p_val > std::numeric_limits<std::int64_t>::max() / u_val)
    throw std::invalid_argument("sample_hard: P * U overflows");
  CounterRng rng(derive_seed(seed, 0x4a7dULL));
  HardSample s;
  s.p_val = p_val;
  s.u_val = u_val;
  s.x.assign(2 * g.n, 0);
  s.i = pool[rng.uniform_below(pool.size())];
  s.x[s.i] = (rng() & 1) ? p_val : 0;
  for (std::size_t j : neighbors_of(g, s.i)) s.x[j] = rng.uniform_int(1, p_val * u_val);
  return s;
}

}  // namespace

KnowledgeGraph KnowledgeGraph::from_instance(const BipartiteGraphInstance& g, std::vector<std::size_t> vertices) {
  KnowledgeGraph kg;
  kg.t_ = vertices.size();
  kg.adjacency_.assign(kg.t_ * kg.t_, 0);
  for (std::size_t v : vertices)
    if (v >= g.n) throw std::out_of_range("KnowledgeGraph: vertex out of range");
  for (std::size_t a = 0; a < kg.t_; ++a)
    for (std::size_t b = 0; b < kg.t_; ++b)
      if (a != b && !g.has_edge(vertices[b], vertices[a])) kg.adjacency_[a * kg.t_ + b] = 1;
  kg.vertices_ = std::move(vertices);
  return kg;
}

KnowledgeGraph KnowledgeGraph::from_edges(std::size_t t, std::span<const std::pair<std::size_t, std::size_t>> edges) {
  KnowledgeGraph kg;
  kg.t_ = t;
  kg.adjacency_.assign(t * t, 0);
  for (std::size_t v = 0; v < t; ++v) kg.vertices_.push_back(v);
  for (auto [a, b] : edges) {
    if (a >= t || b >= t) throw std::out_of_range("KnowledgeGraph: edge endpoint out of range");
    if (a != b) kg.adjacency_[a * t + b] = 1;
  }
  return kg;
}

std::size_t KnowledgeGraph::edge_count() const {
  return static_cast<std::size_t>(std::count(adjacency_.begin(), adjacency_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> istar_nonempty(const BipartiteGraphInstance& g, std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t i : istar(g, k))
    if (!neighbors_of(g, i).empty()) out.push_back(i);
  return out;
}

HardSample sample_hard(const BipartiteGraphInstance& g, std::size_t k, std::int64_t p_val, std::int64_t u_val,
                       std::uint64_t seed) {
  const auto pool = istar(g, k);
  if (pool.empty()) throw LabPreconditionError("sample_hard: I*(G) is empty");
  for (std::size_t i : pool)
    if (neighbors_of(g, i).empty())
      throw LabPreconditionError("sample_hard: N(v_" + std::to_string(i) + ") is empty for i in I*");
  return draw(g, pool, p_val, u_val, seed);
}

HardSample sample_hard_nonempty(const BipartiteGraphInstance& g, std::size_t k, std::int64_t p_val,
                                std::int64_t u_val, std::uint64_t seed) {
  const auto pool = istar_nonempty(g, k);
  if (pool.empty()) throw LabPreconditionError("sample_hard: no i in I*(G) has a nonempty neighborhood");
  return draw(g, pool, p_val, u_val, seed);
}

bool check_index_determines_diam(const BipartiteGraphInstance& g, const HardSample& sample, std::size_t k) {
  if (k < 2) throw LabPreconditionError("check_index_determines_diam: k must be at least 2");
  if (sample.x.size() != 2 * g.n) throw LabPreconditionError("check_index_determines_diam: x has the wrong length");
  const auto star = istar(g, k);
  if (!std::binary_search(star.begin(), star.end(), sample.i))
    throw LabPreconditionError("check_index_determines_diam: i is not in I*(G)");
  const FiniteMetric metric = shortest_path_metric(g);
  const Decision d = diam_decision_oracle(metric, sample.x, 2.0, static_cast<double>(k));
  const Decision expected = sample.x[sample.i] > 0 ? Decision::kOne : Decision::kZero;
  return d == expected;
}

std::int64_t IntegerSketchMatrix::entry_bound() const {
  std::int64_t b = 0;
  for (auto v : entries) b = std::max(b, v < 0 ? -v : v);
  return b;
}

RationalMatrix IntegerSketchMatrix::to_rational() const {
  RationalMatrix m(s, n);
  for (std::size_t r = 0; r < s; ++r)
    for (std::size_t c = 0; c < n; ++c) m(r, c) = at(r, c);
  return m;
}

IntegerSketchMatrix IntegerSketchMatrix::random(std::size_t s, std::size_t n, std::int64_t bound, std::uint64_t seed) {
  IntegerSketchMatrix t{s, n, std::vector<std::int64_t>(s * n)};
  CounterRng rng(derive_seed(seed, 0x7a7eULL));
  for (auto& v : t.entries) v = rng.uniform_int(-bound, bound);
  return t;
}

IntegerSketchMatrix IntegerSketchMatrix::read(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw std::runtime_error("matrix: missing header");
  IntegerSketchMatrix t;
  {
    std::istringstream hdr(line);
    if (!(hdr >> t.s >> t.n)) throw std::runtime_error("matrix: bad header on line " + std::to_string(line_no));
  }
  t.entries.reserve(t.s * t.n);
  for (std::size_t r = 0; r < t.s; ++r) {
    if (!next_line()) throw std::runtime_error("matrix: expected " + std::to_string(t.s) + " rows");
    std::istringstream row(line);
    std::int64_t v = 0;
    std::size_t count = 0;
    while (row >> v) {
      t.entries.push_back(v);
      ++count;
    }
    if (!row.eof() || count != t.n)
      throw std::runtime_error("matrix: line " + std::to_string(line_no) + " needs " + std::to_string(t.n) +
                               " integers");
  }
  return t;
}

void IntegerSketchMatrix::write(std::ostream& out) const {
  out << s << ' ' << n << '\n';
  for (std::size_t r = 0; r < s; ++r) {
    for (std::size_t c = 0; c < n; ++c) out << (c ? " " : "") << at(r, c);
    out << '\n';
  }
}

std::optional<RationalVector> fooling_vector_exists(const IntegerSketchMatrix& t, const BipartiteGraphInstance& g,
                                                    std::size_t i) {
  if (t.n != g.n) throw std::invalid_argument("fooling_vector_exists: T must have n columns");
  if (i >= g.n) throw std::out_of_range("fooling_vector_exists: index out of range");
  std::vector<std::size_t> cols;
  for (std::size_t j : neighbors_of(g, i))
    if (j != i) cols.push_back(j);
  const RationalMatrix tm = t.to_rational();
  RationalVector target = tm.column(i);
  for (auto& v : target) v = -v;
  // T^(i) + A w = 0
  const auto w = solve(tm.select_columns(cols), target);
  if (!w) return std::nullopt;
  RationalVector z(t.n);
  z[i] = 1;
  for (std::size_t a = 0; a < cols.size(); ++a) z[cols[a]] = (*w)[a];
  return z;
}

FoolingVectorError::FoolingVectorError(std::size_t index, RationalVector witness)
    : LabPreconditionError("build_dual_matrix: index " + std::to_string(index) + " admits a fooling vector"),
      index_(index),
      witness_(std::move(witness)) {}

namespace {

std::vector<double> column_double(const IntegerSketchMatrix& t, std::size_t c) {
  std::vector<double> out(t.s);
  for (std::size_t r = 0; r < t.s; ++r) out[r] = static_cast<double>(t.at(r, c));
  return out;
}

double dot_d(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) s += a[r] * b[r];
  return s;
}

/// Projection off span(cols) by modified Gram-Schmidt, twice for stability.
std::vector<double> project_out_d(std::vector<double> v, const std::vector<std::vector<double>>& cols) {
  std::vector<std::vector<double>> q;
  for (auto c : cols) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& e : q) {
        const double f = dot_d(c, e);
        for (std::size_t r = 0; r < c.size(); ++r) c[r] -= f * e[r];
      }
    const double norm = std::sqrt(dot_d(c, c));
    for (auto& x : c) x /= norm;
    q.push_back(std::move(c));
  }
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& e : q) {
      const double f = dot_d(v, e);
      for (std::size_t r = 0; r < v.size(); ++r) v[r] -= f * e[r];
    }
  return v;
}

}  // namespace

DualMatrix build_dual_matrix(const IntegerSketchMatrix& t, const BipartiteGraphInstance& g,
                             const std::vector<std::size_t>& indices) {
  if (t.n != g.n) throw std::invalid_argument("build_dual_matrix: T must have n columns");
  const std::size_t n = g.n;
  std::vector<std::uint8_t> in_set(n, 0);
  for (std::size_t i : indices) {
    if (i >= n) throw std::out_of_range("build_dual_matrix: index out of range");
    if (g.has_edge(i, i))
      throw LabPreconditionError("build_dual_matrix: (u_i, v_i) is an edge for i = " + std::to_string(i));
    in_set[i] = 1;
  }
  const RationalMatrix tm = t.to_rational();
  DualMatrix out;
  out.n = n;
  out.h = RationalMatrix(n, t.s);
  std::vector<std::vector<double>> h_num(n);

  for (std::size_t i = 0; i < n; ++i) {
    const RationalVector col = tm.column(i);
    RationalVector h;
    if (in_set[i]) {
      if (auto z = fooling_vector_exists(t, g, i)) throw FoolingVectorError(i, std::move(*z));
      std::vector<std::size_t> nb = neighbors_of(g, i);
      const RationalMatrix a = tm.select_columns(nb);
      std::vector<RationalVector> basis;
      std::vector<std::vector<double>> basis_d;
      for (std::size_t c : independent_columns(a)) {
        basis.push_back(a.column(c));
        basis_d.push_back(column_double(t, nb[c]));
      }
      const RationalVector p = project_out(col, basis);
      const Rational scale = dot(p, col);  // = |p|^2 > 0 without a fooling vector
      h = p;
      for (auto& v : h) v /= scale;
      auto pd = project_out_d(column_double(t, i), basis_d);
      const double sd = dot_d(pd, column_double(t, i));
      for (auto& v : pd) v /= sd;
      h_num[i] = std::move(pd);
    } else {
      const Rational norm2 = dot(col, col);
      if (norm2.is_zero())
        throw LabPreconditionError("build_dual_matrix: T^(" + std::to_string(i) + ") is zero for i outside I");
      h = col;
      for (auto& v : h) v /= norm2;
      auto cd = column_double(t, i);
      const double nd = dot_d(cd, cd);
      for (auto& v : cd) v /= nd;
      h_num[i] = std::move(cd);
    }
    for (std::size_t r = 0; r < t.s; ++r) out.h(i, r) = h[r];
  }

  out.exact = RationalMatrix(n, n);
  out.numeric.assign(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const RationalVector col = tm.column(j);
    const auto col_d = column_double(t, j);
    for (std::size_t i = 0; i < n; ++i) {
      Rational s = 0;
      for (std::size_t r = 0; r < t.s; ++r) s += out.h(i, r) * col[r];
      out.exact(i, j) = s;
      out.numeric[i * n + j] = dot_d(h_num[i], col_d);
    }
  }
  return out;
}

std::size_t minrank_bruteforce_f2(const KnowledgeGraph& kg) {
  const std::size_t t = kg.size();
  if (t > kMinrankVertexCap) throw std::invalid_argument("minrank_bruteforce_f2: at most 5 vertices");
  if (t == 0) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> free;
  for (std::size_t a = 0; a < t; ++a)
    for (std::size_t b = 0; b < t; ++b)
      if (a != b && kg.has_edge(a, b)) free.emplace_back(a, b);
  std::size_t best = t;
  const std::uint64_t combos = std::uint64_t{1} << free.size();
  for (std::uint64_t mask = 0; mask < combos && best > 1; ++mask) {
    std::uint32_t rows[kMinrankVertexCap] = {};
    for (std::size_t a = 0; a < t; ++a) rows[a] = 1u << a;
    for (std::size_t e = 0; e < free.size(); ++e)
      if (mask >> e & 1) rows[free[e].first] |= 1u << free[e].second;
    // Gaussian elimination over F_2 on row bitmasks.
    std::size_t r = 0;
    for (std::size_t bit = 0; bit < t; ++bit) {
      std::size_t pick = r;
      while (pick < t && !(rows[pick] >> bit & 1)) ++pick;
      if (pick == t) continue;
      std::swap(rows[pick], rows[r]);
      for (std::size_t o = 0; o < t; ++o)
        if (o != r && (rows[o] >> bit & 1)) rows[o] ^= rows[r];
      ++r;
    }
    best = std::min(best, r);
  }
  return best;
}

GraphPropertiesReport verify_graph_properties(const BipartiteGraphInstance& g, std::size_t k) {
  GraphPropertiesReport rep;
  rep.n = g.n;
  rep.k = k;
  rep.p = g.p;
  rep.edges = g.edge_count();
  const auto star = istar(g, k);
  rep.istar_size = star.size();
  std::vector<std::vector<std::size_t>> nb(g.n);
  rep.min_neighborhood = g.n == 0 ? 0 : std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < g.n; ++i) {
    nb[i] = neighbors_of(g, i);
    rep.min_neighborhood = std::min(rep.min_neighborhood, nb[i].size());
    rep.max_neighborhood = std::max(rep.max_neighborhood, nb[i].size());
  }
  for (std::size_t i : star)
    if (nb[i].empty()) ++rep.empty_neighborhoods_in_istar;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = i + 1; j < g.n; ++j) {
      std::size_t common = 0;
      for (std::size_t a = 0, b = 0; a < nb[i].size() && b < nb[j].size();) {
        if (nb[i][a] == nb[j][b]) {
          ++common;
          ++a;
          ++b;
        } else if (nb[i][a] < nb[j][b]) {
          ++a;
        } else {
          ++b;
        }
      }
      rep.max_common_neighborhood = std::max(rep.max_common_neighborhood, common);
    }
  const double n = static_cast<double>(g.n);
  rep.istar_large = static_cast<double>(rep.istar_size) >= 0.9 * n;
  rep.neighborhoods_large = static_cast<double>(rep.min_neighborhood) >= g.p * n / 2.0;
  rep.overlaps_small = g.n < 2 || static_cast<double>(rep.max_common_neighborhood) <=
                                      std::log(n) * std::max(n * g.p * g.p, 1.0);
  rep.istar_neighborhoods_nonempty = rep.empty_neighborhoods_in_istar == 0;
  return rep;
}

AdversaryResult adversary_eval(const AdversaryConfig& config, const BipartiteGraphInstance& g, std::size_t k,
                               std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("adversary_eval: trials must be positive");
  const FiniteMetric metric = shortest_path_metric(g);
  std::optional<EstimatorContext> ctx;
  if (config.decider == AdversaryDecider::kSketch) ctx = EstimatorContext::build(metric, config.estimator);
  AdversaryResult res;
  res.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const HardSample s = sample_hard_nonempty(g, k, config.p_val, config.u_val, derive_seed(seed, 0xad5ULL, t));
    bool says_far = false;
    if (config.decider == AdversaryDecider::kOracle) {
      says_far = diam_decision_oracle(metric, s.x, 2.0, static_cast<double>(k)) == Decision::kOne;
    } else {
      says_far = estimate_by_replay(*ctx, s.x, true).eta > 2.0;
    }
    if (says_far != (s.x[s.i] > 0)) ++res.failures;
  }
  return res;
}

}  // namespace diamsketch
