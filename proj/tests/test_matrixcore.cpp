#include "doctest.h"

#include <random>

#include "mlecrn/error.hpp"
#include "mlecrn/matrixcore.hpp"
#include "support.hpp"

using namespace mlecrn;
using namespace mlecrn::testing;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::Internal;
}

void check_hnf_shape(const HermiteDecomposition& d) {
  std::size_t last_pivot = 0;
  for (std::size_t r = 0; r < d.h.rows(); ++r) {
    std::size_t pivot = d.h.cols();
    for (std::size_t j = 0; j < d.h.cols(); ++j) {
      if (d.h(r, j) != 0) {
        pivot = j;
        break;
      }
    }
    if (r >= d.rank) {
      CHECK(pivot == d.h.cols());
      continue;
    }
    REQUIRE(pivot < d.h.cols());
    if (r > 0) CHECK(pivot > last_pivot);
    CHECK(d.h(r, pivot) > 0);
    for (std::size_t above = 0; above < r; ++above) {
      CHECK(d.h(above, pivot) >= 0);
      CHECK(d.h(above, pivot) < d.h(r, pivot));
    }
    last_pivot = pivot;
  }
}

}  // namespace

TEST_CASE("validate_design_matrix") {
  const DesignMatrix a = two_param_matrix();
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 3);
  CHECK(a.column_sum() == 2);

  CHECK(validate_design_matrix(make_int_matrix({{1, 0}, {0, 1}})).column_sum() == 1);
  CHECK(code_of([] { validate_design_matrix(make_int_matrix({{1, 2}, {0, 0}})); }) ==
        ErrorCode::UnequalColumnSums);
  CHECK(code_of([] { validate_design_matrix(IntMatrix()); }) == ErrorCode::EmptyMatrix);
  CHECK(code_of([] { validate_design_matrix(make_int_matrix({{1, -1}, {-1, 1}})); }) ==
        ErrorCode::ZeroColumnSum);

  SUBCASE("error names offending columns") {
    try {
      validate_design_matrix(make_int_matrix({{1, 1, 2, 3}}));
      FAIL("expected UnequalColumnSums");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("columns 3 (sum 2), 4 (sum 3)") != std::string::npos);
    }
  }

  SUBCASE("zero rows are dropped and reported") {
    const DesignMatrix z = validate_design_matrix(make_int_matrix({{1, 1, 1}, {0, 0, 0}, {1, 0, 1}, {0, 1, 0}}));
    CHECK(z.rows() == 3);
    REQUIRE(z.dropped_rows().size() == 1);
    CHECK(z.dropped_rows()[0] == 1);
    CHECK(z(1, 0) == 1);
  }
}

TEST_CASE("hermite_normal_form") {
  SUBCASE("identity") {
    const auto d = hermite_normal_form(IntMatrix::identity(3));
    CHECK(d.h == to_big(IntMatrix::identity(3)));
    CHECK(d.u == to_big(IntMatrix::identity(3)));
    CHECK(d.rank == 3);
  }
  SUBCASE("zero matrix") {
    const auto d = hermite_normal_form(IntMatrix(2, 3));
    CHECK(d.h == BigMatrix(2, 3));
    CHECK(d.u == BigMatrix::identity(2));
    CHECK(d.rank == 0);
  }
  SUBCASE("two-parameter matrix has rank 2") {
    const IntMatrix m = make_int_matrix({{2, 1, 0}, {0, 1, 2}});
    const auto d = hermite_normal_form(m);
    CHECK(d.rank == 2);
    CHECK(big_product(d.u, to_big(m)) == d.h);
    CHECK(abs(bareiss_determinant(d.u)) == 1);
    check_hnf_shape(d);
  }
  SUBCASE("random matrices: U M = H, |det U| = 1, echelon shape") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> entry(-9, 9);
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    for (int trial = 0; trial < 200; ++trial) {
      IntMatrix m(dim(rng), dim(rng));
      for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = entry(rng);
      const auto d = hermite_normal_form(m);
      CHECK(big_product(d.u, to_big(m)) == d.h);
      CHECK(abs(bareiss_determinant(d.u)) == 1);
      check_hnf_shape(d);
    }
  }
}

TEST_CASE("integer_kernel_basis") {
  SUBCASE("two-parameter matrix") {
    const KernelBasis b = integer_kernel_basis(two_param_matrix());
    REQUIRE(b.size() == 1);
    CHECK(b.vectors[0] == IntVector{1, -2, 1});
  }
  SUBCASE("full column rank gives an empty basis") {
    CHECK(integer_kernel_basis(validate_design_matrix(make_int_matrix({{1, 0}, {0, 1}}))).empty());
  }
  SUBCASE("single row of ones") {
    const KernelBasis b = integer_kernel_basis(validate_design_matrix(make_int_matrix({{1, 1, 1}})));
    REQUIRE(b.size() == 2);
    const std::vector<IntVector> reference{{1, -1, 0}, {0, 1, -1}};
    for (const auto& v : b.vectors) CHECK(integer_combination(reference, v));
    for (const auto& v : reference) CHECK(integer_combination(b.vectors, v));
  }
  SUBCASE("lattice, not just rational, kernel") {
    // (1,0,1,-2) lies in the lattice; a scaled rational basis could miss it.
    const DesignMatrix a = validate_design_matrix(make_int_matrix({{2, 2, 0, 1}, {0, 0, 2, 1}}));
    const KernelBasis b = integer_kernel_basis(a);
    for (const auto& v : brute_force_kernel(a, 3)) CHECK(integer_combination(b.vectors, v));
  }
  SUBCASE("properties on random design matrices") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
      const DesignMatrix a = validate_design_matrix(random_signed_design(rng));
      const KernelBasis b = integer_kernel_basis(a);
      const ColumnSet cols = maximal_independent_columns(a);
      CHECK(b.size() + cols.size() == a.cols());
      CHECK(b.size() == a.cols() - rank(a.entries()));
      for (const auto& v : b.vectors) {
        CHECK(multiply(a, v) == IntVector(a.rows(), 0));
        std::int64_t sum = 0;
        for (auto x : v) sum += x;
        CHECK(sum == 0);
        const auto first = std::find_if(v.begin(), v.end(), [](std::int64_t x) { return x != 0; });
        REQUIRE(first != v.end());
        CHECK(*first > 0);
      }
      // Linear independence.
      if (!b.empty()) {
        IntMatrix k(b.size(), a.cols());
        for (std::size_t r = 0; r < b.size(); ++r)
          for (std::size_t j = 0; j < a.cols(); ++j) k(r, j) = b.vectors[r][j];
        CHECK(rank(k) == b.size());
      }
      CHECK(integer_kernel_basis(a).vectors == b.vectors);
    }
  }
}

TEST_CASE("maximal_independent_columns") {
  CHECK(maximal_independent_columns(two_param_matrix()).indices == std::vector<std::size_t>{0, 1});
  CHECK(maximal_independent_columns(validate_design_matrix(IntMatrix::identity(2))).indices ==
        std::vector<std::size_t>{0, 1});
  CHECK(maximal_independent_columns(validate_design_matrix(make_int_matrix({{1, 1, 1}}))).indices ==
        std::vector<std::size_t>{0});
  // Leftmost: column 2 duplicates column 1 and is skipped.
  CHECK(maximal_independent_columns(validate_design_matrix(make_int_matrix({{1, 1, 0}, {0, 0, 1}}))).indices ==
        std::vector<std::size_t>{0, 2});
}
