#pragma once

// Deterministic mass-action dynamics: x' = sum_{y->y'} k x^y (y' - y).
//
// Integration uses the Dormand-Prince 5(4) embedded pair with per-species
// mixed absolute/relative error weights, switching to a two-stage Rosenbrock
// pair once steps are persistently limited by stability. A run stops once the
// velocity is negligible relative to both the state and the gross flux, at
// t_max, or when the step size underflows.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlecrn/crn.hpp"
#include "mlecrn/matrixcore.hpp"

namespace mlecrn {

struct SimOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double equilibrium_tol = 1e-10;
  // Convergence also needs |x'_i| <= balance_tol * (gross flux through i)
  // for every species, which does not depend on how slow the network is.
  double balance_tol = 1e-9;
  double t_max = 1e6;
  std::size_t max_steps = 10'000'000;
  // A sample is recorded every `record_every_steps` accepted steps (0 turns
  // this off) and whenever `record_interval` time has passed since the last
  // sample (0 turns this off). The initial and final states are always kept.
  std::size_t record_every_steps = 1;
  double record_interval = 0.0;

  void validate() const;
};

enum class SimStatus { Converged, MaxTimeReached, StepFailure };

std::string_view to_string(SimStatus status);

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  SimStatus status = SimStatus::StepFailure;
  Eigen::VectorXd equilibrium;  // set when Converged
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::string note;

  const Eigen::VectorXd& final_state() const { return states.back(); }
  double final_time() const { return times.back(); }
};

// Precompiled sparse form of a network's mass-action vector field.
class MassActionSystem {
 public:
  explicit MassActionSystem(const ReactionNetwork& net);

  std::size_t dimension() const noexcept { return dimension_; }
  void evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& dxdt) const;
  // d(x')/dx, dense.
  void jacobian(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const;
  // sum over reactions of k x^y |y'_i - y_i|
  void gross_flux(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;

 private:
  struct Term {
    Eigen::Index species;
    std::int64_t amount;
  };
  struct CompiledReaction {
    double rate;
    std::vector<Term> reactants;
    std::vector<Term> change;
  };
  std::size_t dimension_;
  std::vector<CompiledReaction> reactions_;
};

// Throws DimensionMismatch.
Eigen::VectorXd mass_action_rhs(const ReactionNetwork& net, const Eigen::VectorXd& x);

// Throws DimensionMismatch, NonFiniteState, InvalidData (negative x0).
Trajectory simulate(const ReactionNetwork& net, const Eigen::VectorXd& x0,
                    const SimOptions& opts = {});

// g(x) = sum_i x_i log x_i - x_i - x_i log alpha_i, with 0 log 0 = 0.
double lyapunov_g(const Eigen::VectorXd& x, const Eigen::VectorXd& alpha);

struct LyapunovReport {
  double max_increase = 0.0;
  std::vector<double> values;
};

LyapunovReport monitor_lyapunov(const Trajectory& traj, const Eigen::VectorXd& alpha);

struct PerturbedRates {
  std::vector<double> base;
  std::vector<double> realized;
  double delta = 0.0;
};

struct PerturbedNetwork {
  ReactionNetwork network;
  PerturbedRates rates;
};

// Each rate is redrawn uniformly from the open interval (k - delta, k + delta).
// Throws DeltaTooLarge when delta is not below every rate.
PerturbedNetwork perturb_rates(const ReactionNetwork& net, double delta, std::uint64_t seed);

// max_t ||A x(t) - A x(0)||_inf over the first A.cols() species.
double conserved_drift(const Trajectory& traj, const DesignMatrix& a);

std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& species);

}  // namespace mlecrn
