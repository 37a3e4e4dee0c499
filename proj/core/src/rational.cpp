#include "diamsketch/rational.hpp"

#include <stdexcept>
#include <utility>

namespace diamsketch {

RationalVector RationalMatrix::column(std::size_t c) const {
  if (c >= cols_) throw std::out_of_range("RationalMatrix::column");
  RationalVector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

RationalMatrix RationalMatrix::select_columns(const std::vector<std::size_t>& cols) const {
  RationalMatrix out(rows_, cols.size());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = (*this)(r, cols.at(c));
  return out;
}

RationalVector RationalMatrix::multiply(const RationalVector& v) const {
  if (v.size() != cols_) throw std::invalid_argument("RationalMatrix::multiply: size mismatch");
  RationalVector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c)
      if (!v[c].is_zero()) out[r] += (*this)(r, c) * v[c];
  return out;
}

std::vector<std::size_t> rref(RationalMatrix& m) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t pick = row;
    while (pick < m.rows() && m(pick, col).is_zero()) ++pick;
    if (pick == m.rows()) continue;
    if (pick != row)
      for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(pick, c), m(row, c));
    const Rational inv = 1 / m(row, col);
    for (std::size_t c = col; c < m.cols(); ++c) m(row, c) *= inv;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r == row || m(r, col).is_zero()) continue;
      const Rational f = m(r, col);
      for (std::size_t c = col; c < m.cols(); ++c) m(r, c) -= f * m(row, c);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

std::size_t rank(RationalMatrix m) { return rref(m).size(); }

std::optional<RationalVector> solve(const RationalMatrix& a, const RationalVector& b) {
  if (b.size() != a.rows()) throw std::invalid_argument("solve: size mismatch");
  RationalMatrix aug(a.rows(), a.cols() + 1);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) aug(r, c) = a(r, c);
    aug(r, a.cols()) = b[r];
  }
  const auto pivots = rref(aug);
  if (!pivots.empty() && pivots.back() == a.cols()) return std::nullopt;  // inconsistent
  RationalVector w(a.cols());
  for (std::size_t r = 0; r < pivots.size(); ++r) w[pivots[r]] = aug(r, a.cols());
  return w;
}

std::vector<std::size_t> independent_columns(const RationalMatrix& a) {
  RationalMatrix copy = a;
  return rref(copy);
}

Rational dot(const RationalVector& a, const RationalVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

RationalVector project_out(const RationalVector& v, const std::vector<RationalVector>& basis) {
  if (basis.empty()) return v;
  // Solve the normal equations (B^T B) c = B^T v and subtract B c.
  const std::size_t k = basis.size();
  RationalMatrix gram(k, k);
  RationalVector rhs(k);
  for (std::size_t a = 0; a < k; ++a) {
    rhs[a] = dot(basis[a], v);
    for (std::size_t b = a; b < k; ++b) gram(a, b) = gram(b, a) = dot(basis[a], basis[b]);
  }
  if (rank(gram) < k) throw std::logic_error("project_out: basis is not independent");
  const auto coef = solve(gram, rhs);
  if (!coef) throw std::logic_error("project_out: basis is not independent");
  RationalVector out = v;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t r = 0; r < out.size(); ++r) out[r] -= (*coef)[a] * basis[a][r];
  return out;
}

}  // namespace diamsketch
