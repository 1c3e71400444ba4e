#pragma once

// Convex-optimization ground truth for log-linear maximum likelihood.
//
// The maximum likelihood distribution is the maximum-entropy point of the
// sufficient polytope {p > 0 : A p = A u / |u|_1}. It is found through the
// dual: p(y)_j ∝ exp((A^T y)_j), with y chosen by damped Newton on the
// log-partition objective log sum_j exp((A^T y)_j) - y . (A u / |u|_1), whose
// gradient and Hessian are the model moments and covariance.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mlecrn/matrixcore.hpp"

namespace mlecrn {

// Observed outcome weights. Built from integer counts, or from frequencies
// that already sum to one.
class DataVector {
 public:
  // Throws InvalidData when empty, negative, or all zero.
  static DataVector from_counts(const std::vector<std::int64_t>& counts);
  // Throws InvalidData unless nonnegative and summing to one within 1e-9.
  static DataVector from_frequencies(const std::vector<double>& freqs);

  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  bool is_counts() const noexcept { return counts_; }
  double total() const { return weights_.sum(); }
  Eigen::VectorXd normalized() const { return weights_ / total(); }

 private:
  Eigen::VectorXd weights_;
  bool counts_ = true;
};

Eigen::MatrixXd to_eigen(const DesignMatrix& a);

struct OracleOptions {
  double moment_tol = 1e-12;
  int max_iterations = 500;
  double interior_tol = 1e-10;
};

// Throws PolytopeEmptyOrBoundary when the sufficient polytope has no strictly
// positive point, NonConvergence when Newton stalls.
Eigen::VectorXd mld_oracle(const DesignMatrix& a, const DataVector& u,
                           const OracleOptions& opts = {});

struct ThetaReadout {
  Eigen::VectorXd theta;  // normalized: sum_j theta^{a_j} = 1
  bool unique = true;
  double log_residual = 0.0;
};

// Minimum-norm solution of A^T log(theta) = log(p_hat). Throws
// NotInToricVariety if the fit residual exceeds tol or a selected column's
// monomial misses p_hat by more than tol.
ThetaReadout theta_readout(const DesignMatrix& a, const ColumnSet& columns,
                           const Eigen::VectorXd& p_hat, double tol = 1e-8);

// p_j(theta) = theta^{a_j} / sum_k theta^{a_k}.
Eigen::VectorXd model_distribution(const DesignMatrix& a, const Eigen::VectorXd& theta);

// sum_j u_j log p_j(theta), without the multinomial coefficient.
double log_likelihood(const DesignMatrix& a, const Eigen::VectorXd& theta, const DataVector& u);

// max_b |b . log x|; zero exactly on the toric variety.
double birch_residual(const KernelBasis& basis, const Eigen::VectorXd& x);

// ||A p - A u/|u|_1||_inf
double moment_residual(const DesignMatrix& a, const Eigen::VectorXd& p, const DataVector& u);

double shannon_entropy(const Eigen::VectorXd& p);

// Membership in the relative interior of the simplex with matching moments.
bool in_sufficient_polytope(const DesignMatrix& a, const DataVector& u, const Eigen::VectorXd& p,
                            double tol = 1e-10);

struct MleResult {
  Eigen::VectorXd p_hat;
  Eigen::VectorXd theta_hat;
  double log_likelihood = 0.0;
  double birch_residual = 0.0;
  double moment_residual = 0.0;
  bool theta_unique = true;
};

MleResult maximum_likelihood(const DesignMatrix& a, const DataVector& u,
                             const OracleOptions& opts = {});

struct EquivalenceReport {
  double linf_distance = 0.0;
  double simulated_birch_residual = 0.0;
  double simulated_moment_residual = 0.0;
  double oracle_birch_residual = 0.0;
  double oracle_moment_residual = 0.0;
  double tolerance = 1e-5;
  bool pass = false;
};

EquivalenceReport verify_equivalence(const DesignMatrix& a, const DataVector& u,
                                     const Eigen::VectorXd& simulated,
                                     const Eigen::VectorXd& oracle, double tolerance = 1e-5);

}  // namespace mlecrn
