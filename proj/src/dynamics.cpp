#include "mlecrn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mlecrn/crn_text.hpp"
#include "mlecrn/error.hpp"

namespace mlecrn {

void SimOptions::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(equilibrium_tol > 0.0))
    throw Error(ErrorCode::InvalidData, "simulation tolerances must be positive");
  if (!(balance_tol > 0.0)) throw Error(ErrorCode::InvalidData, "balance_tol must be positive");
  if (!(t_max > 0.0)) throw Error(ErrorCode::InvalidData, "t_max must be positive");
  if (max_steps == 0) throw Error(ErrorCode::InvalidData, "max_steps must be positive");
  if (record_interval < 0.0) throw Error(ErrorCode::InvalidData, "record_interval must be nonnegative");
}

std::string_view to_string(SimStatus status) {
  switch (status) {
    case SimStatus::Converged: return "Converged";
    case SimStatus::MaxTimeReached: return "MaxTimeReached";
    case SimStatus::StepFailure: return "StepFailure";
  }
  return "Unknown";
}

MassActionSystem::MassActionSystem(const ReactionNetwork& net) : dimension_(net.species_count()) {
  for (const Reaction& r : net.reactions()) {
    CompiledReaction c{r.rate, {}, {}};
    for (std::size_t i = 0; i < dimension_; ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      if (r.reactant[i] != 0) c.reactants.push_back({idx, r.reactant[i]});
      if (r.product[i] != r.reactant[i]) c.change.push_back({idx, r.product[i] - r.reactant[i]});
    }
    reactions_.push_back(std::move(c));
  }
}

namespace {

template <class Reactions, class Accumulate>
void for_each_flux(const Reactions& reactions, const Eigen::VectorXd& x, Accumulate&& acc) {
  for (const auto& r : reactions) {
    double flux = r.rate;
    for (const auto& t : r.reactants) {
      const double xi = x(t.species);
      for (std::int64_t k = 0; k < t.amount; ++k) flux *= xi;
    }
    if (flux == 0.0) continue;
    for (const auto& t : r.change) acc(t.species, t.amount, flux);
  }
}

}  // namespace

void MassActionSystem::evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& dxdt) const {
  dxdt.setZero(static_cast<Eigen::Index>(dimension_));
  for_each_flux(reactions_, x, [&](Eigen::Index i, std::int64_t amount, double flux) {
    dxdt(i) += static_cast<double>(amount) * flux;
  });
}

void MassActionSystem::jacobian(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
  const auto n = static_cast<Eigen::Index>(dimension_);
  jac.setZero(n, n);
  for (const CompiledReaction& r : reactions_) {
    for (std::size_t p = 0; p < r.reactants.size(); ++p) {
      double d = r.rate * static_cast<double>(r.reactants[p].amount);
      for (std::size_t q = 0; q < r.reactants.size(); ++q) {
        const double xq = x(r.reactants[q].species);
        const std::int64_t power = r.reactants[q].amount - (q == p ? 1 : 0);
        for (std::int64_t k = 0; k < power; ++k) d *= xq;
      }
      if (d == 0.0) continue;
      for (const Term& t : r.change) jac(t.species, r.reactants[p].species) += static_cast<double>(t.amount) * d;
    }
  }
}

void MassActionSystem::gross_flux(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  out.setZero(static_cast<Eigen::Index>(dimension_));
  for_each_flux(reactions_, x, [&](Eigen::Index i, std::int64_t amount, double flux) {
    out(i) += static_cast<double>(amount < 0 ? -amount : amount) * flux;
  });
}

Eigen::VectorXd mass_action_rhs(const ReactionNetwork& net, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != net.species_count())
    throw Error(ErrorCode::DimensionMismatch, "state length does not match species count");
  Eigen::VectorXd dxdt;
  MassActionSystem(net).evaluate(x, dxdt);
  return dxdt;
}

namespace {

// |R(z)| of the Dormand-Prince pair is about 0.24 at z = -2.5.
constexpr double kStableStep = 2.5;
// Consecutive stability-limited steps before switching to the implicit pair.
constexpr std::size_t kStiffRun = 50;
const double kRosGamma = 1.0 + 1.0 / std::sqrt(2.0);

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double weighted_rms(const Eigen::VectorXd& v, const Eigen::VectorXd& scale) {
  if (v.size() == 0) return 0.0;
  return std::sqrt((v.array() / scale.array()).square().mean());
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

bool at_equilibrium(const MassActionSystem& system, const Eigen::VectorXd& x, const Eigen::VectorXd& f,
                    const SimOptions& opts) {
  if (x.size() == 0) return true;
  if (f.cwiseAbs().maxCoeff() > opts.equilibrium_tol * (1.0 + x.cwiseAbs().maxCoeff())) return false;
  Eigen::VectorXd gross;
  system.gross_flux(x, gross);
  return (f.array().abs() <= opts.balance_tol * gross.array()).all();
}

}  // namespace

Trajectory simulate(const ReactionNetwork& net, const Eigen::VectorXd& x0, const SimOptions& opts) {
  opts.validate();
  if (static_cast<std::size_t>(x0.size()) != net.species_count())
    throw Error(ErrorCode::DimensionMismatch, "initial state length does not match species count");
  if (!all_finite(x0)) throw Error(ErrorCode::NonFiniteState, "initial state is not finite");
  if ((x0.array() < 0.0).any())
    throw Error(ErrorCode::InvalidData, "initial concentrations must be nonnegative");

  const MassActionSystem system(net);
  const Eigen::Index n = x0.size();
  Trajectory traj;
  double t = 0.0;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd f;
  system.evaluate(x, f);
  traj.times.push_back(t);
  traj.states.push_back(x);

  auto finish = [&](SimStatus status, std::string note) {
    if (traj.times.back() != t) {
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
    traj.status = status;
    traj.note = std::move(note);
    if (status == SimStatus::Converged) traj.equilibrium = x;
    return traj;
  };

  if (at_equilibrium(system, x, f, opts)) return finish(SimStatus::Converged, "");

  auto scale_of = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (opts.abs_tol + opts.rel_tol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix().eval();
  };

  // Starting step size heuristic (Hairer, Norsett & Wanner, II.4).
  double h;
  {
    const Eigen::VectorXd sc = scale_of(x, x);
    const double d0 = weighted_rms(x, sc);
    const double d1 = weighted_rms(f, sc);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, opts.t_max);
    Eigen::VectorXd x1 = (x + h0 * f).cwiseMax(0.0);
    Eigen::VectorXd f1;
    system.evaluate(x1, f1);
    const double d2 = weighted_rms(f1 - f, sc) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    h = std::min({100.0 * h0, h1, opts.t_max});
  }

  Eigen::VectorXd k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), xs(n), xnew(n), err(n);
  Eigen::MatrixXd jac;
  const Eigen::MatrixXd span_h = stoichiometric_subspace(net).basis;
  std::size_t since_record = 0;
  double last_record_t = 0.0;
  bool last_rejected = false;
  bool stiff = false;
  std::size_t capped_run = 0;

  while (true) {
    if (traj.accepted_steps + traj.rejected_steps >= opts.max_steps)
      return finish(SimStatus::MaxTimeReached, "step budget exhausted");
    if (t >= opts.t_max) return finish(SimStatus::MaxTimeReached, "");
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      return finish(SimStatus::StepFailure, "step size underflow");
    h = std::min(h, opts.t_max - t);

    double h_stable = std::numeric_limits<double>::infinity();
    if (!stiff) {
      xs = x + h * a21 * f;
      system.evaluate(xs, k2);
      xs = x + h * (a31 * f + a32 * k2);
      system.evaluate(xs, k3);
      xs = x + h * (a41 * f + a42 * k2 + a43 * k3);
      system.evaluate(xs, k4);
      xs = x + h * (a51 * f + a52 * k2 + a53 * k3 + a54 * k4);
      system.evaluate(xs, k5);
      xs = x + h * (a61 * f + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      system.evaluate(xs, k6);
      xnew = x + h * (a71 * f + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      system.evaluate(xnew, k7);
      err = h * (e1 * f + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      // Dominant Jacobian magnitude from the last two stages, as in Hairer's
      // stiffness test. Near equilibrium the error estimate vanishes and h
      // would otherwise settle on the edge of the stability region, where
      // deviations stop decaying.
      if (const double dx = (xnew - xs).norm(); dx > 0.0) {
        const double rho = (k7 - k6).norm() / dx;
        if (rho > 0.0) h_stable = kStableStep / rho;
      }
    } else {
      // Two-stage L-stable Rosenbrock pair with a first-order embedded
      // solution. The exact stages lie in H, so the linear systems are solved
      // in H coordinates. Conservation laws then hold to round-off and the
      // directions where I - gamma*h*J is near identity never enter the solve.
      system.jacobian(x, jac);
      const Eigen::Index r = span_h.cols();
      const Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(r, r) -
                                                    kRosGamma * h * (span_h.transpose() * jac * span_h));
      k2 = span_h * lu.solve(span_h.transpose() * f);
      xs = x + h * k2;
      system.evaluate(xs, k3);
      k4 = span_h * lu.solve(span_h.transpose() * (k3 - 2.0 * k2));
      xnew = x + h * (1.5 * k2 + 0.5 * k4);
      system.evaluate(xnew, k7);
      err = 0.5 * h * (k2 + k4);
    }

    const double exponent = stiff ? -0.5 : -0.2;
    const double norm = weighted_rms(err, scale_of(x, xnew));
    const bool finite = all_finite(xnew) && std::isfinite(norm);
    const bool overshoot = finite && (xnew.array() < -opts.abs_tol).any();
    if (!finite || norm > 1.0 || overshoot) {
      ++traj.rejected_steps;
      const double factor = (!finite || overshoot) ? 0.25 : std::max(0.2, 0.9 * std::pow(norm, exponent));
      h *= factor;
      last_rejected = true;
      continue;
    }

    ++traj.accepted_steps;
    t += h;
    if ((xnew.array() < 0.0).any()) {
      // Round-off excursions above -abs_tol.
      x = xnew.cwiseMax(0.0);
      system.evaluate(x, f);
    } else {
      x.swap(xnew);
      f.swap(k7);
    }

    ++since_record;
    const bool by_steps = opts.record_every_steps > 0 && since_record >= opts.record_every_steps;
    const bool by_time = opts.record_interval > 0.0 && t - last_record_t >= opts.record_interval;
    if (by_steps || by_time) {
      traj.times.push_back(t);
      traj.states.push_back(x);
      since_record = 0;
      last_record_t = t;
    }

    if (at_equilibrium(system, x, f, opts)) return finish(SimStatus::Converged, "");

    double factor = norm == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(norm, exponent)));
    if (last_rejected) factor = std::min(factor, 1.0);
    last_rejected = false;
    if (h * factor > h_stable) {
      // A long run of stability-limited steps means the problem is stiff.
      if (++capped_run >= kStiffRun) stiff = true;
      h = h_stable;
    } else {
      capped_run = 0;
      h *= factor;
    }
  }
}

double lyapunov_g(const Eigen::VectorXd& x, const Eigen::VectorXd& alpha) {
  if (x.size() != alpha.size())
    throw Error(ErrorCode::DimensionMismatch, "state and balance point lengths differ");
  double g = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(alpha(i) > 0.0)) throw Error(ErrorCode::NonPositiveAlpha, "balance point must be positive");
    if (x(i) < 0.0) throw Error(ErrorCode::NonPositiveX, "concentrations must be nonnegative");
    if (x(i) > 0.0) g += x(i) * std::log(x(i));
    g -= x(i) + x(i) * std::log(alpha(i));
  }
  return g;
}

LyapunovReport monitor_lyapunov(const Trajectory& traj, const Eigen::VectorXd& alpha) {
  LyapunovReport report;
  report.values.reserve(traj.states.size());
  for (const auto& x : traj.states) report.values.push_back(lyapunov_g(x, alpha));
  if (report.values.size() < 2) return report;
  report.max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < report.values.size(); ++k)
    report.max_increase = std::max(report.max_increase, report.values[k] - report.values[k - 1]);
  return report;
}

PerturbedNetwork perturb_rates(const ReactionNetwork& net, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw Error(ErrorCode::InvalidData, "delta must be a nonnegative finite number");
  PerturbedNetwork out{net, {}};
  out.rates.delta = delta;
  for (const Reaction& r : net.reactions()) {
    if (delta >= r.rate) {
      throw Error(ErrorCode::DeltaTooLarge, "delta " + format_double(delta) +
                                                " is not below rate " + format_double(r.rate));
    }
    out.rates.base.push_back(r.rate);
  }
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < net.reaction_count(); ++k) {
    const double base = out.rates.base[k];
    double realized = base;
    if (delta > 0.0) {
      std::uniform_real_distribution<double> draw(base - delta, base + delta);
      do {
        realized = draw(rng);
      } while (realized <= base - delta || realized >= base + delta);
    }
    out.rates.realized.push_back(realized);
    out.network.set_rate(k, realized);
  }
  return out;
}

double conserved_drift(const Trajectory& traj, const DesignMatrix& a) {
  if (traj.states.empty()) return 0.0;
  const std::size_t n = a.cols();
  if (static_cast<std::size_t>(traj.states.front().size()) < n)
    throw Error(ErrorCode::DimensionMismatch, "trajectory has fewer species than matrix columns");
  Eigen::MatrixXd am(a.rows(), n);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j) am(i, j) = static_cast<double>(a(i, j));
  const auto nn = static_cast<Eigen::Index>(n);
  const Eigen::VectorXd base = am * traj.states.front().head(nn);
  double drift = 0.0;
  for (const auto& x : traj.states) {
    if (am.rows() == 0) break;
    drift = std::max(drift, (am * x.head(nn) - base).cwiseAbs().maxCoeff());
  }
  return drift;
}

std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& species) {
  std::ostringstream out;
  out << 't';
  for (const auto& s : species) out << ',' << s;
  out << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << format_double(traj.times[k]);
    for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) out << ',' << format_double(traj.states[k](i));
    out << '\n';
  }
  return out.str();
}

}  // namespace mlecrn
