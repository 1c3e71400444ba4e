#pragma once

// Exact integer-lattice data for log-linear design matrices.
//
// A design matrix is an integer m x n matrix whose columns all sum to the
// same value c. Its integer kernel Z^n ∩ ker A determines the reversible
// reactions of the distribution network, and a maximal independent set of its
// columns determines the parameter-producing reactions of the estimator
// network. Everything here is exact: kernel and rank computations go through
// an arbitrary-precision Hermite normal form.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace mlecrn {

using BigInt = boost::multiprecision::cpp_int;

// Dense row-major matrix. Used with std::int64_t for user-facing integer
// matrices and with BigInt for Hermite normal form intermediates.
template <class T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using IntMatrix = DenseMatrix<std::int64_t>;
using BigMatrix = DenseMatrix<BigInt>;
using IntVector = std::vector<std::int64_t>;

IntMatrix make_int_matrix(std::initializer_list<std::initializer_list<std::int64_t>> rows);

// Validated design matrix. Zero rows of the raw input are dropped (their
// parameters never appear in any monomial); the indices of dropped rows are
// kept so callers can report them.
class DesignMatrix {
 public:
  std::size_t rows() const noexcept { return entries_.rows(); }
  std::size_t cols() const noexcept { return entries_.cols(); }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
  std::int64_t column_sum() const noexcept { return column_sum_; }
  const IntMatrix& entries() const noexcept { return entries_; }
  const std::vector<std::size_t>& dropped_rows() const noexcept { return dropped_rows_; }

  IntVector column(std::size_t j) const;
  bool has_negative_entries() const;

  friend DesignMatrix validate_design_matrix(const IntMatrix& raw);

 private:
  IntMatrix entries_;
  std::int64_t column_sum_ = 0;
  std::vector<std::size_t> dropped_rows_;
};

// Throws EmptyMatrix, UnequalColumnSums (naming the offending columns) or
// ZeroColumnSum.
DesignMatrix validate_design_matrix(const IntMatrix& raw);

struct HermiteDecomposition {
  BigMatrix h;  // row Hermite normal form
  BigMatrix u;  // unimodular, u * m == h
  std::size_t rank = 0;
};

// Row-style HNF: pivots strictly move right, pivots are positive, entries
// above a pivot lie in [0, pivot), rows below the rank are zero.
HermiteDecomposition hermite_normal_form(const BigMatrix& m);
HermiteDecomposition hermite_normal_form(const IntMatrix& m);

BigMatrix to_big(const IntMatrix& m);

std::size_t rank(const IntMatrix& m);

struct KernelBasis {
  std::vector<IntVector> vectors;
  std::size_t size() const noexcept { return vectors.size(); }
  bool empty() const noexcept { return vectors.empty(); }
};

// Lattice basis of Z^n ∩ ker A in canonical (HNF-reduced) form; each vector's
// first nonzero entry is positive. Throws Overflow if an entry exceeds int64.
KernelBasis integer_kernel_basis(const DesignMatrix& a);

// 0-based column indices chosen greedily left to right.
struct ColumnSet {
  std::vector<std::size_t> indices;
  std::size_t size() const noexcept { return indices.size(); }
};

ColumnSet maximal_independent_columns(const DesignMatrix& a);

// Exact A * v.
IntVector multiply(const DesignMatrix& a, const IntVector& v);

}  // namespace mlecrn
