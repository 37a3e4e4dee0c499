#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace diamsketch {

using Rational = boost::multiprecision::cpp_rational;
using RationalVector = std::vector<Rational>;

/// Dense row-major matrix over Q.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  RationalVector column(std::size_t c) const;
  /// Matrix with the listed columns, in order.
  RationalMatrix select_columns(const std::vector<std::size_t>& cols) const;
  RationalVector multiply(const RationalVector& v) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

/// Reduced row echelon form in place; returns the pivot columns.
std::vector<std::size_t> rref(RationalMatrix& m);

std::size_t rank(RationalMatrix m);

/// Some w with A w = b (free variables set to 0), or nullopt.
std::optional<RationalVector> solve(const RationalMatrix& a, const RationalVector& b);

/// Indices of a maximal linearly independent subset of the columns of A,
/// chosen greedily left to right.
std::vector<std::size_t> independent_columns(const RationalMatrix& a);

Rational dot(const RationalVector& a, const RationalVector& b);

/// Orthogonal projection of v onto the complement of span(basis). The basis
/// vectors must be linearly independent.
RationalVector project_out(const RationalVector& v, const std::vector<RationalVector>& basis);

}  // namespace diamsketch
