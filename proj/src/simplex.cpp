#include "mlecrn/simplex.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "mlecrn/error.hpp"

namespace mlecrn::lp {

namespace {

class Tableau {
 public:
  Tableau(Eigen::MatrixXd rows, std::vector<int> basis, int n_cols)
      : t_(std::move(rows)), basis_(std::move(basis)), n_cols_(n_cols) {}

  Eigen::MatrixXd& table() { return t_; }
  std::vector<int>& basis() { return basis_; }

  // Returns false when the objective is unbounded above.
  bool optimize(const Eigen::VectorXd& cost, const std::vector<bool>& allowed, double tol) {
    const int rhs = n_cols_;
    Eigen::RowVectorXd obj = Eigen::RowVectorXd::Zero(n_cols_ + 1);
    obj.head(n_cols_) = -cost.transpose();
    for (int i = 0; i < t_.rows(); ++i) {
      const double coef = obj(basis_[i]);
      if (coef != 0.0) obj -= coef * t_.row(i);
    }

    for (int iter = 0; iter < 50000; ++iter) {
      int enter = -1;
      for (int j = 0; j < n_cols_; ++j) {
        if (allowed[j] && obj(j) < -tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) {
        value_ = obj(rhs);
        return true;
      }
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < t_.rows(); ++i) {
        const double a = t_(i, enter);
        if (a <= tol) continue;
        const double ratio = t_(i, rhs) / a;
        if (leave < 0 || ratio < best - tol ||
            (std::abs(ratio - best) <= tol && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter, obj);
    }
    throw Error(ErrorCode::Internal, "simplex iteration limit reached");
  }

  void pivot(int row, int col, Eigen::RowVectorXd& obj) {
    t_.row(row) /= t_(row, col);
    for (int i = 0; i < t_.rows(); ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    const double f = obj(col);
    if (f != 0.0) obj -= f * t_.row(row);
    basis_[row] = col;
  }

  void pivot(int row, int col) {
    Eigen::RowVectorXd unused = Eigen::RowVectorXd::Zero(n_cols_ + 1);
    pivot(row, col, unused);
  }

  double value() const { return value_; }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  int n_cols_;
  double value_ = 0.0;
};

}  // namespace

LpSolution maximize(const LinearProgram& program, double tol) {
  const int n = static_cast<int>(program.objective.size());
  const int n_eq = static_cast<int>(program.eq.rows());
  const int n_le = static_cast<int>(program.le.rows());
  if ((n_eq > 0 && program.eq.cols() != n) || (n_le > 0 && program.le.cols() != n) ||
      program.eq_rhs.size() != n_eq || program.le_rhs.size() != n_le) {
    throw Error(ErrorCode::DimensionMismatch, "linear program dimensions are inconsistent");
  }

  int n_art = n_eq;
  for (int i = 0; i < n_le; ++i)
    if (program.le_rhs(i) < 0) ++n_art;

  const int rows = n_eq + n_le;
  const int n_cols = n + n_le + n_art;
  const int rhs = n_cols;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(rows, n_cols + 1);
  std::vector<int> basis(rows);
  int art = n + n_le;

  for (int i = 0; i < n_eq; ++i) {
    const double s = program.eq_rhs(i) < 0 ? -1.0 : 1.0;
    t.row(i).head(n) = s * program.eq.row(i);
    t(i, rhs) = s * program.eq_rhs(i);
    t(i, art) = 1.0;
    basis[i] = art++;
  }
  for (int k = 0; k < n_le; ++k) {
    const int i = n_eq + k;
    const int slack = n + k;
    if (program.le_rhs(k) >= 0) {
      t.row(i).head(n) = program.le.row(k);
      t(i, slack) = 1.0;
      t(i, rhs) = program.le_rhs(k);
      basis[i] = slack;
    } else {
      t.row(i).head(n) = -program.le.row(k);
      t(i, slack) = -1.0;
      t(i, rhs) = -program.le_rhs(k);
      t(i, art) = 1.0;
      basis[i] = art++;
    }
  }

  Tableau tab(std::move(t), std::move(basis), n_cols);
  const int first_art = n + n_le;

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n_cols);
    phase1.tail(n_art).setConstant(-1.0);
    std::vector<bool> all(n_cols, true);
    tab.optimize(phase1, all, tol);
    if (tab.value() < -std::sqrt(tol)) return {LpStatus::Infeasible, 0.0, {}};

    // Drive zero-valued artificials out of the basis where possible.
    for (int i = 0; i < rows; ++i) {
      if (tab.basis()[i] < first_art) continue;
      for (int j = 0; j < first_art; ++j) {
        if (std::abs(tab.table()(i, j)) > tol) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(n_cols);
  cost.head(n) = program.objective;
  std::vector<bool> allowed(n_cols, true);
  for (int j = first_art; j < n_cols; ++j) allowed[j] = false;
  if (!tab.optimize(cost, allowed, tol)) return {LpStatus::Unbounded, 0.0, {}};

  LpSolution out;
  out.status = LpStatus::Optimal;
  out.value = tab.value();
  out.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < rows; ++i)
    if (tab.basis()[i] < n) out.x(tab.basis()[i]) = tab.table()(i, rhs);
  return out;
}

}  // namespace mlecrn::lp
