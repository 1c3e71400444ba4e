#include "mlecrn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mlecrn/error.hpp"
#include "mlecrn/simplex.hpp"

namespace mlecrn {

DataVector DataVector::from_counts(const std::vector<std::int64_t>& counts) {
  if (counts.empty()) throw Error(ErrorCode::InvalidData, "data vector is empty");
  DataVector u;
  u.weights_.resize(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] < 0) throw Error(ErrorCode::InvalidData, "counts must be nonnegative");
    u.weights_(static_cast<Eigen::Index>(j)) = static_cast<double>(counts[j]);
  }
  if (u.weights_.sum() <= 0.0) throw Error(ErrorCode::InvalidData, "data vector must be nonzero");
  u.counts_ = true;
  return u;
}

DataVector DataVector::from_frequencies(const std::vector<double>& freqs) {
  if (freqs.empty()) throw Error(ErrorCode::InvalidData, "data vector is empty");
  DataVector u;
  u.weights_ = Eigen::Map<const Eigen::VectorXd>(freqs.data(), static_cast<Eigen::Index>(freqs.size()));
  if (!u.weights_.allFinite() || (u.weights_.array() < 0.0).any())
    throw Error(ErrorCode::InvalidData, "frequencies must be finite and nonnegative");
  if (std::abs(u.weights_.sum() - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidData, "frequencies must sum to 1");
  u.counts_ = false;
  return u;
}

Eigen::MatrixXd to_eigen(const DesignMatrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = static_cast<double>(a(i, j));
  return m;
}

namespace {

void require_length(const DesignMatrix& a, Eigen::Index len, const char* what) {
  if (static_cast<std::size_t>(len) != a.cols())
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " length does not match matrix columns");
}

std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double log_sum_exp(const Eigen::VectorXd& z) {
  const double top = z.maxCoeff();
  return top + std::log((z.array() - top).exp().sum());
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp().matrix();
  return p / p.sum();
}

// Largest t such that some p in the polytope has every p_j >= t.
double interior_margin(const Eigen::MatrixXd& m, const Eigen::VectorXd& target) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index n = m.cols();
  lp::LinearProgram program;
  program.objective = Eigen::VectorXd::Zero(n + 1);
  program.objective(n) = 1.0;
  program.eq = Eigen::MatrixXd::Zero(rows + 1, n + 1);
  program.eq.topLeftCorner(rows, n) = m;
  program.eq.row(rows).head(n).setOnes();
  program.eq_rhs.resize(rows + 1);
  program.eq_rhs << target, 1.0;
  program.le = Eigen::MatrixXd::Zero(n, n + 1);
  program.le.leftCols(n) = -Eigen::MatrixXd::Identity(n, n);
  program.le.col(n).setOnes();
  program.le_rhs = Eigen::VectorXd::Zero(n);
  const lp::LpSolution sol = lp::maximize(program, 1e-12);
  if (sol.status != lp::LpStatus::Optimal) return 0.0;
  return sol.value;
}

}  // namespace

Eigen::VectorXd mld_oracle(const DesignMatrix& a, const DataVector& u, const OracleOptions& opts) {
  require_length(a, static_cast<Eigen::Index>(u.size()), "data vector");
  const Eigen::MatrixXd m = to_eigen(a);
  const Eigen::VectorXd target = m * u.normalized();

  if (interior_margin(m, target) <= opts.interior_tol) {
    throw Error(ErrorCode::PolytopeEmptyOrBoundary,
                "no strictly positive distribution matches the observed moments; the maximum "
                "likelihood distribution lies on the simplex boundary");
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(m.rows());
  auto objective = [&](const Eigen::VectorXd& yy) { return log_sum_exp(m.transpose() * yy) - yy.dot(target); };

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const Eigen::VectorXd p = softmax(m.transpose() * y);
    const Eigen::VectorXd grad = m * p - target;
    if (grad.cwiseAbs().maxCoeff() <= opts.moment_tol) return p / p.sum();

    const Eigen::VectorXd mp = m * p;
    const Eigen::MatrixXd hess = m * p.asDiagonal() * m.transpose() - mp * mp.transpose();
    // The Hessian is singular along ker(A^T) and along the all-ones direction
    // (equal column sums); the minimum-norm step ignores those directions.
    Eigen::VectorXd step = hess.completeOrthogonalDecomposition().solve(-grad);
    if (!step.allFinite() || step.dot(grad) >= 0.0) {
      const double scale = std::max(1e-12, hess.diagonal().cwiseAbs().maxCoeff());
      const Eigen::MatrixXd reg = hess + 1e-8 * scale * Eigen::MatrixXd::Identity(m.rows(), m.rows());
      step = reg.ldlt().solve(-grad);
      if (!step.allFinite() || step.dot(grad) >= 0.0) step = -grad;
    }

    const double f0 = objective(y);
    const double slope = grad.dot(step);
    const double gnorm = grad.norm();
    // Close to the optimum the objective change drops below round-off, so a
    // step that leaves it flat but shrinks the gradient is accepted too.
    const double flat = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f0));
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      const Eigen::VectorXd candidate = y + t * step;
      const double f1 = objective(candidate);
      if (!std::isfinite(f1)) continue;
      bool accept = f1 <= f0 + 1e-4 * t * slope;
      if (!accept && std::abs(f1 - f0) <= flat) {
        const Eigen::VectorXd pc = softmax(m.transpose() * candidate);
        accept = (m * pc - target).norm() < gnorm;
      }
      if (accept) {
        y = candidate;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    if (y.cwiseAbs().maxCoeff() > 1e6) {
      throw Error(ErrorCode::PolytopeEmptyOrBoundary, "dual iterates diverged; moments are not attainable in the interior");
    }
  }
  const Eigen::VectorXd p = softmax(m.transpose() * y);
  throw Error(ErrorCode::NonConvergence,
              "Newton did not reach moment residual " + short_double(opts.moment_tol) + " (last " +
                  short_double((m * p - target).cwiseAbs().maxCoeff()) + ")");
}

ThetaReadout theta_readout(const DesignMatrix& a, const ColumnSet& columns,
                           const Eigen::VectorXd& p_hat, double tol) {
  require_length(a, p_hat.size(), "distribution");
  if (!((p_hat.array() > 0.0).all()))
    throw Error(ErrorCode::NotInToricVariety, "distribution must be strictly positive");

  const Eigen::MatrixXd m = to_eigen(a);
  const Eigen::VectorXd logp = p_hat.array().log().matrix();
  const auto cod = m.transpose().completeOrthogonalDecomposition();
  Eigen::VectorXd z = cod.solve(logp);

  ThetaReadout out;
  out.log_residual = (m.transpose() * z - logp).cwiseAbs().maxCoeff();
  if (!(out.log_residual <= tol)) {
    throw Error(ErrorCode::NotInToricVariety,
                "log-distribution is not in the row span of A (residual " + short_double(out.log_residual) + ")");
  }
  out.unique = static_cast<std::size_t>(cod.rank()) == a.rows();

  // Land in the normalized parameter space: scaling theta by s scales every
  // monomial by s^c.
  const double c = static_cast<double>(a.column_sum());
  z.array() -= log_sum_exp(m.transpose() * z) / c;
  out.theta = z.array().exp().matrix();

  const Eigen::VectorXd monomials = (m.transpose() * z).array().exp().matrix();
  for (std::size_t j : columns.indices) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (std::abs(monomials(jj) - p_hat(jj)) > tol) {
      throw Error(ErrorCode::NotInToricVariety,
                  "theta^{a_j} misses p_j for column " + std::to_string(j + 1));
    }
  }
  return out;
}

Eigen::VectorXd model_distribution(const DesignMatrix& a, const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != a.rows())
    throw Error(ErrorCode::DimensionMismatch, "theta length does not match matrix rows");
  if (!((theta.array() > 0.0).all()) || !theta.allFinite())
    throw Error(ErrorCode::NonPositiveTheta, "theta must be strictly positive");
  return softmax(to_eigen(a).transpose() * theta.array().log().matrix());
}

double log_likelihood(const DesignMatrix& a, const Eigen::VectorXd& theta, const DataVector& u) {
  require_length(a, static_cast<Eigen::Index>(u.size()), "data vector");
  if (static_cast<std::size_t>(theta.size()) != a.rows())
    throw Error(ErrorCode::DimensionMismatch, "theta length does not match matrix rows");
  if (!((theta.array() > 0.0).all()) || !theta.allFinite())
    throw Error(ErrorCode::NonPositiveTheta, "theta must be strictly positive");
  const Eigen::VectorXd z = to_eigen(a).transpose() * theta.array().log().matrix();
  const double lse = log_sum_exp(z);
  double ll = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double w = u.weights()(j);
    if (w > 0.0) ll += w * (z(j) - lse);
  }
  return ll;
}

double birch_residual(const KernelBasis& basis, const Eigen::VectorXd& x) {
  if (!((x.array() > 0.0).all())) throw Error(ErrorCode::NonPositiveX, "x must be strictly positive");
  const Eigen::VectorXd logx = x.array().log().matrix();
  double worst = 0.0;
  for (const IntVector& b : basis.vectors) {
    if (static_cast<Eigen::Index>(b.size()) != x.size())
      throw Error(ErrorCode::DimensionMismatch, "kernel vector length does not match x");
    double s = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) s += static_cast<double>(b[j]) * logx(static_cast<Eigen::Index>(j));
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

double moment_residual(const DesignMatrix& a, const Eigen::VectorXd& p, const DataVector& u) {
  require_length(a, p.size(), "distribution");
  require_length(a, static_cast<Eigen::Index>(u.size()), "data vector");
  const Eigen::MatrixXd m = to_eigen(a);
  return (m * p - m * u.normalized()).cwiseAbs().maxCoeff();
}

double shannon_entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j)
    if (p(j) > 0.0) h -= p(j) * std::log(p(j));
  return h;
}

bool in_sufficient_polytope(const DesignMatrix& a, const DataVector& u, const Eigen::VectorXd& p,
                            double tol) {
  if (static_cast<std::size_t>(p.size()) != a.cols()) return false;
  if (!((p.array() > 0.0).all())) return false;
  if (std::abs(p.sum() - 1.0) > tol) return false;
  return moment_residual(a, p, u) <= tol;
}

MleResult maximum_likelihood(const DesignMatrix& a, const DataVector& u, const OracleOptions& opts) {
  MleResult r;
  r.p_hat = mld_oracle(a, u, opts);
  const ThetaReadout readout = theta_readout(a, maximal_independent_columns(a), r.p_hat);
  r.theta_hat = readout.theta;
  r.theta_unique = readout.unique;
  r.log_likelihood = log_likelihood(a, r.theta_hat, u);
  r.birch_residual = birch_residual(integer_kernel_basis(a), r.p_hat);
  r.moment_residual = moment_residual(a, r.p_hat, u);
  return r;
}

EquivalenceReport verify_equivalence(const DesignMatrix& a, const DataVector& u,
                                     const Eigen::VectorXd& simulated, const Eigen::VectorXd& oracle,
                                     double tolerance) {
  require_length(a, simulated.size(), "simulated equilibrium");
  require_length(a, oracle.size(), "oracle distribution");
  const KernelBasis basis = integer_kernel_basis(a);
  auto birch = [&](const Eigen::VectorXd& x) {
    return (x.array() > 0.0).all() ? birch_residual(basis, x) : std::numeric_limits<double>::infinity();
  };

  EquivalenceReport report;
  report.tolerance = tolerance;
  report.linf_distance = (simulated - oracle).cwiseAbs().maxCoeff();
  report.simulated_birch_residual = birch(simulated);
  report.simulated_moment_residual = moment_residual(a, simulated, u);
  report.oracle_birch_residual = birch(oracle);
  report.oracle_moment_residual = moment_residual(a, oracle, u);
  report.pass = report.linf_distance <= tolerance;
  return report;
}

}  // namespace mlecrn
