#pragma once

// Dense two-phase simplex (Bland's rule) for the small linear programs used by
// the siphon-criticality test and the sufficient-polytope interior check.
//
//   maximize    objective . x
//   subject to  eq * x == eq_rhs,  le * x <= le_rhs,  x >= 0

#include <Eigen/Dense>

namespace mlecrn::lp {

struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd le;
  Eigen::VectorXd le_rhs;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Eigen::VectorXd x;
};

LpSolution maximize(const LinearProgram& program, double tol = 1e-9);

}  // namespace mlecrn::lp
