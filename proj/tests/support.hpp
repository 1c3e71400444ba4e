#pragma once

// Test-only generators and brute-force oracles. Nothing here calls into the
// code paths it is used to check.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mlecrn/crn.hpp"
#include "mlecrn/matrixcore.hpp"

namespace mlecrn::testing {

inline DesignMatrix two_param_matrix() { return validate_design_matrix(make_int_matrix({{2, 1, 0}, {0, 1, 2}})); }

// Random design matrix with entries in [0, max_entry], equal column sums, no
// zero rows and full row rank.
inline DesignMatrix random_design_matrix(std::mt19937_64& rng, std::size_t max_rows = 4,
                                         std::size_t max_cols = 6, std::int64_t max_entry = 3) {
  while (true) {
    const auto m = std::uniform_int_distribution<std::size_t>(1, max_rows)(rng);
    const auto n = std::uniform_int_distribution<std::size_t>(std::max<std::size_t>(m, 2), max_cols)(rng);
    const auto c = std::uniform_int_distribution<std::int64_t>(1, max_entry * static_cast<std::int64_t>(m))(rng);
    std::uniform_int_distribution<std::int64_t> entry(0, max_entry);
    IntMatrix raw(m, n);
    for (std::size_t j = 0; j < n; ++j) {
      while (true) {
        std::int64_t sum = 0;
        for (std::size_t i = 0; i + 1 < m; ++i) sum += raw(i, j) = entry(rng);
        const std::int64_t last = c - sum;
        if (last >= 0 && last <= max_entry) {
          raw(m - 1, j) = last;
          break;
        }
      }
    }
    bool zero_row = false;
    for (std::size_t i = 0; i < m; ++i) {
      bool zero = true;
      for (std::size_t j = 0; j < n; ++j) zero = zero && raw(i, j) == 0;
      zero_row = zero_row || zero;
    }
    if (zero_row) continue;
    Eigen::MatrixXd dm(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) dm(i, j) = static_cast<double>(raw(i, j));
    if (static_cast<std::size_t>(Eigen::FullPivLU<Eigen::MatrixXd>(dm).rank()) != m) continue;
    return validate_design_matrix(raw);
  }
}

// Random small integer matrix with possibly negative entries and equal
// column sums (the last row absorbs the difference).
inline IntMatrix random_signed_design(std::mt19937_64& rng) {
  const auto m = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  const auto n = std::uniform_int_distribution<std::size_t>(2, 5)(rng);
  const auto c = std::uniform_int_distribution<std::int64_t>(1, 4)(rng);
  std::uniform_int_distribution<std::int64_t> entry(-2, 3);
  IntMatrix raw(m + 1, n);
  for (std::size_t j = 0; j < n; ++j) {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < m; ++i) sum += raw(i, j) = entry(rng);
    raw(m, j) = c - sum;
  }
  return raw;
}

// Exact determinant by fraction-free (Bareiss) elimination.
inline BigInt bareiss_determinant(BigMatrix a) {
  const std::size_t n = a.rows();
  if (n == 0) return 1;
  BigInt sign = 1, prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t swap = k + 1;
      while (swap < n && a(swap, k) == 0) ++swap;
      if (swap == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(swap, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
    }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

inline BigMatrix big_product(const BigMatrix& a, const BigMatrix& b) {
  BigMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
  return out;
}

// Every v in Z^n with |v|_inf <= bound and A v = 0.
inline std::vector<IntVector> brute_force_kernel(const DesignMatrix& a, std::int64_t bound) {
  const std::size_t n = a.cols();
  std::vector<IntVector> out;
  IntVector v(n, -bound);
  while (true) {
    bool zero = true;
    for (std::size_t i = 0; i < a.rows() && zero; ++i) {
      std::int64_t s = 0;
      for (std::size_t j = 0; j < n; ++j) s += a(i, j) * v[j];
      zero = s == 0;
    }
    if (zero) out.push_back(v);
    std::size_t j = 0;
    while (j < n && v[j] == bound) v[j++] = -bound;
    if (j == n) break;
    ++v[j];
  }
  return out;
}

// Whether v is an integer combination of the rows in basis: solve in floating
// point, round, and confirm exactly.
inline bool integer_combination(const std::vector<IntVector>& basis, const IntVector& v) {
  const auto n = static_cast<Eigen::Index>(v.size());
  if (basis.empty()) return std::all_of(v.begin(), v.end(), [](std::int64_t x) { return x == 0; });
  const auto k = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd b(n, k);
  Eigen::VectorXd target(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    target(j) = static_cast<double>(v[j]);
    for (Eigen::Index r = 0; r < k; ++r) b(j, r) = static_cast<double>(basis[r][j]);
  }
  const Eigen::VectorXd coef = b.colPivHouseholderQr().solve(target);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::int64_t s = 0;
    for (Eigen::Index r = 0; r < k; ++r) s += std::llround(coef(r)) * basis[r][j];
    if (s != v[j]) return false;
  }
  return true;
}

// Minimal siphons by checking every subset against the textbook condition.
inline std::vector<std::vector<std::size_t>> brute_force_minimal_siphons(const ReactionNetwork& net) {
  const std::size_t n = net.species_count();
  std::vector<std::uint32_t> siphons;
  for (std::uint32_t set = 1; set < (1u << n); ++set) {
    bool ok = true;
    for (const Reaction& r : net.reactions()) {
      bool produced = false, consumed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(set >> i & 1u)) continue;
        produced = produced || r.product[i] > 0;
        consumed = consumed || r.reactant[i] > 0;
      }
      if (produced && !consumed) ok = false;
    }
    if (ok) siphons.push_back(set);
  }
  std::vector<std::vector<std::size_t>> minimal;
  for (std::uint32_t s : siphons) {
    bool is_min = true;
    for (std::uint32_t t : siphons)
      if (t != s && (t & s) == t) is_min = false;
    if (!is_min) continue;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (s >> i & 1u) members.push_back(i);
    minimal.push_back(members);
  }
  std::sort(minimal.begin(), minimal.end());
  return minimal;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace mlecrn::testing
