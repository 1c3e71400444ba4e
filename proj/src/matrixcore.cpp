#include "mlecrn/matrixcore.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <utility>

#include "mlecrn/error.hpp"

namespace mlecrn {

namespace {

BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
  return q;
}

template <class T>
void swap_rows(DenseMatrix<T>& m, std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(a, j), m(b, j));
}

// row[target] -= q * row[source]
void subtract_row(BigMatrix& m, std::size_t target, std::size_t source, const BigInt& q) {
  for (std::size_t j = 0; j < m.cols(); ++j) m(target, j) -= q * m(source, j);
}

void negate_row(BigMatrix& m, std::size_t row) {
  for (std::size_t j = 0; j < m.cols(); ++j) m(row, j) = -m(row, j);
}

std::int64_t narrow(const BigInt& v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min()) {
    throw Error(ErrorCode::Overflow, "kernel basis entry does not fit in 64 bits: " + v.str());
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

IntMatrix make_int_matrix(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  IntMatrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorCode::DimensionMismatch, "ragged matrix literal");
    std::size_t j = 0;
    for (auto v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

IntVector DesignMatrix::column(std::size_t j) const {
  IntVector col(rows());
  for (std::size_t i = 0; i < rows(); ++i) col[i] = entries_(i, j);
  return col;
}

bool DesignMatrix::has_negative_entries() const {
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j)
      if (entries_(i, j) < 0) return true;
  return false;
}

DesignMatrix validate_design_matrix(const IntMatrix& raw) {
  if (raw.empty()) throw Error(ErrorCode::EmptyMatrix, "design matrix has no entries");

  std::vector<std::int64_t> sums(raw.cols(), 0);
  for (std::size_t j = 0; j < raw.cols(); ++j)
    for (std::size_t i = 0; i < raw.rows(); ++i) sums[j] += raw(i, j);

  std::vector<std::size_t> offending;
  for (std::size_t j = 1; j < raw.cols(); ++j)
    if (sums[j] != sums[0]) offending.push_back(j);
  if (!offending.empty()) {
    std::ostringstream msg;
    msg << "column sums differ from column 1 (sum " << sums[0] << ") in column";
    if (offending.size() > 1) msg << 's';
    for (std::size_t k = 0; k < offending.size(); ++k) {
      msg << (k == 0 ? " " : ", ") << offending[k] + 1 << " (sum " << sums[offending[k]] << ')';
    }
    throw Error(ErrorCode::UnequalColumnSums, msg.str());
  }
  if (sums[0] == 0) {
    throw Error(ErrorCode::ZeroColumnSum,
                "column sums are all zero; the parameter space cannot be normalized");
  }

  DesignMatrix a;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    bool zero = true;
    for (std::size_t j = 0; j < raw.cols(); ++j) zero = zero && raw(i, j) == 0;
    if (zero)
      a.dropped_rows_.push_back(i);
    else
      kept.push_back(i);
  }
  a.entries_ = IntMatrix(kept.size(), raw.cols());
  for (std::size_t r = 0; r < kept.size(); ++r)
    for (std::size_t j = 0; j < raw.cols(); ++j) a.entries_(r, j) = raw(kept[r], j);
  a.column_sum_ = sums[0];
  return a;
}

BigMatrix to_big(const IntMatrix& m) {
  BigMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

HermiteDecomposition hermite_normal_form(const BigMatrix& m) {
  HermiteDecomposition out{m, BigMatrix::identity(m.rows()), 0};
  BigMatrix& h = out.h;
  BigMatrix& u = out.u;
  const std::size_t rows = h.rows();
  std::size_t pivot = 0;

  for (std::size_t col = 0; col < h.cols() && pivot < rows; ++col) {
    // Euclid on the column below the pivot row until one nonzero remains.
    bool found = false;
    while (true) {
      std::size_t best = rows;
      for (std::size_t i = pivot; i < rows; ++i) {
        if (h(i, col) == 0) continue;
        if (best == rows || abs(h(i, col)) < abs(h(best, col))) best = i;
      }
      if (best == rows) break;
      found = true;
      swap_rows(h, pivot, best);
      swap_rows(u, pivot, best);
      bool cleared = true;
      for (std::size_t i = pivot + 1; i < rows; ++i) {
        if (h(i, col) == 0) continue;
        const BigInt q = h(i, col) / h(pivot, col);
        subtract_row(h, i, pivot, q);
        subtract_row(u, i, pivot, q);
        if (h(i, col) != 0) cleared = false;
      }
      if (cleared) break;
    }
    if (!found) continue;

    if (h(pivot, col) < 0) {
      negate_row(h, pivot);
      negate_row(u, pivot);
    }
    for (std::size_t i = 0; i < pivot; ++i) {
      const BigInt q = floor_div(h(i, col), h(pivot, col));
      if (q == 0) continue;
      subtract_row(h, i, pivot, q);
      subtract_row(u, i, pivot, q);
    }
    ++pivot;
  }
  out.rank = pivot;
  return out;
}

HermiteDecomposition hermite_normal_form(const IntMatrix& m) {
  return hermite_normal_form(to_big(m));
}

std::size_t rank(const IntMatrix& m) {
  if (m.empty()) return 0;
  return hermite_normal_form(m).rank;
}

KernelBasis integer_kernel_basis(const DesignMatrix& a) {
  const std::size_t n = a.cols();
  BigMatrix at(n, a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j) at(j, i) = a(i, j);

  // U * A^T = H; the rows of U opposite the zero rows of H span the left
  // kernel of A^T as a lattice.
  const HermiteDecomposition hnf = hermite_normal_form(at);
  const std::size_t k = n - hnf.rank;
  KernelBasis basis;
  if (k == 0) return basis;

  BigMatrix kernel(k, n);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t j = 0; j < n; ++j) kernel(r, j) = hnf.u(hnf.rank + r, j);

  const HermiteDecomposition canonical = hermite_normal_form(kernel);
  basis.vectors.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    IntVector v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = narrow(canonical.h(r, j));
    basis.vectors.push_back(std::move(v));
  }
  return basis;
}

ColumnSet maximal_independent_columns(const DesignMatrix& a) {
  const std::size_t target = rank(a.entries());
  ColumnSet chosen;
  for (std::size_t j = 0; j < a.cols() && chosen.size() < target; ++j) {
    IntMatrix trial(a.rows(), chosen.size() + 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t s = 0; s < chosen.size(); ++s) trial(i, s) = a(i, chosen.indices[s]);
      trial(i, chosen.size()) = a(i, j);
    }
    if (rank(trial) == chosen.size() + 1) chosen.indices.push_back(j);
  }
  return chosen;
}

IntVector multiply(const DesignMatrix& a, const IntVector& v) {
  if (v.size() != a.cols())
    throw Error(ErrorCode::DimensionMismatch, "vector length does not match matrix columns");
  IntVector out(a.rows(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * v[j];
  return out;
}

}  // namespace mlecrn
