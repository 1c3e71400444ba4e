#include "doctest.h"

#include <cmath>
#include <random>

#include "mlecrn/dynamics.hpp"
#include "mlecrn/error.hpp"
#include "mlecrn/inference.hpp"
#include "support.hpp"

using namespace mlecrn;
using namespace mlecrn::testing;

namespace {

ReactionNetwork two_param_mld() {
  const DesignMatrix a = two_param_matrix();
  return build_mld_network(a, integer_kernel_basis(a));
}

const double kX2 = (-4.0 + std::sqrt(37.0)) / 12.0;

double linf(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("mass_action_rhs") {
  const Eigen::VectorXd f = mass_action_rhs(two_param_mld(), vec({0.25, 0.5, 0.25}));
  CHECK(f(0) == doctest::Approx(0.1875).epsilon(1e-15));
  CHECK(f(1) == doctest::Approx(-0.375).epsilon(1e-15));
  CHECK(f(2) == doctest::Approx(0.1875).epsilon(1e-15));

  // Hand-written form of the same ODEs.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd x = vec({u(rng), u(rng), u(rng)});
    const double flux = x(1) * x(1) - x(0) * x(2);
    const Eigen::VectorXd g = mass_action_rhs(two_param_mld(), x);
    CHECK(std::abs(g(0) - flux) < 1e-14);
    CHECK(std::abs(g(1) + 2 * flux) < 1e-14);
    CHECK(std::abs(g(2) - flux) < 1e-14);
  }

  CHECK(mass_action_rhs(two_param_mld(), vec({0.2, 0.2, 0.2})).cwiseAbs().maxCoeff() < 1e-16);
  CHECK(mass_action_rhs(ReactionNetwork({"A", "B"}), vec({1, 2})).isZero());
  CHECK_THROWS_AS(mass_action_rhs(two_param_mld(), vec({1, 2})), Error);

  // 0^0 = 1: the inflow 0 -> A fires at the origin.
  ReactionNetwork inflow({"A"});
  inflow.add_reaction({{0}, {1}, 2.0});
  CHECK(mass_action_rhs(inflow, vec({0}))(0) == 2.0);
}

TEST_CASE("simulate") {
  SUBCASE("symmetric start") {
    const Trajectory t = simulate(two_param_mld(), vec({0.5, 0, 0.5}));
    REQUIRE(t.status == SimStatus::Converged);
    CHECK(linf(t.equilibrium, vec({1.0 / 3, 1.0 / 3, 1.0 / 3})) < 1e-6);
  }
  SUBCASE("no reactions converges immediately") {
    const Trajectory t = simulate(ReactionNetwork({"A", "B"}), vec({0.3, 0.7}));
    CHECK(t.status == SimStatus::Converged);
    CHECK(t.equilibrium == vec({0.3, 0.7}));
    CHECK(t.accepted_steps == 0);
  }
  SUBCASE("boundary start with closed form") {
    SimOptions opts;
    opts.equilibrium_tol = 1e-14;
    const Trajectory t = simulate(two_param_mld(), vec({0.75, 0.25, 0}), opts);
    REQUIRE(t.status == SimStatus::Converged);
    const auto& x = t.equilibrium;
    CHECK(std::abs(x(1) * x(1) - x(0) * x(2)) < 1e-8);
    CHECK(std::abs(x(1) - kX2) < 1e-8);
  }
  SUBCASE("trajectory invariants") {
    const Trajectory t = simulate(two_param_mld(), vec({0.75, 0.25, 0}));
    for (std::size_t k = 1; k < t.times.size(); ++k) CHECK(t.times[k] > t.times[k - 1]);
    double total0 = t.states.front().sum();
    for (const auto& s : t.states) {
      CHECK((s.array() >= 0.0).all());
      CHECK(std::abs(s.sum() - total0) < 1e-8);
    }
    const Eigen::VectorXd f = mass_action_rhs(two_param_mld(), t.final_state());
    CHECK(f.cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + t.final_state().cwiseAbs().maxCoeff()));
  }
  SUBCASE("t_max and step budget") {
    SimOptions opts;
    opts.t_max = 0.01;
    const Trajectory t = simulate(two_param_mld(), vec({0.5, 0, 0.5}), opts);
    CHECK(t.status == SimStatus::MaxTimeReached);
    CHECK(t.final_time() == doctest::Approx(0.01));
    opts.t_max = 1e6;
    opts.max_steps = 3;
    CHECK(simulate(two_param_mld(), vec({0.5, 0, 0.5}), opts).status == SimStatus::MaxTimeReached);
  }
  SUBCASE("recording by interval") {
    SimOptions opts;
    opts.record_every_steps = 0;
    opts.record_interval = 1.0;
    const Trajectory t = simulate(two_param_mld(), vec({0.5, 0, 0.5}), opts);
    REQUIRE(t.status == SimStatus::Converged);
    for (std::size_t k = 1; k + 1 < t.times.size(); ++k) CHECK(t.times[k] - t.times[k - 1] >= 1.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(simulate(two_param_mld(), vec({1, 0})), Error);
    CHECK_THROWS_AS(simulate(two_param_mld(), vec({1, -1, 0})), Error);
    CHECK_THROWS_AS(simulate(two_param_mld(), vec({1, NAN, 0})), Error);
    SimOptions bad;
    bad.rel_tol = 0;
    CHECK_THROWS_AS(simulate(two_param_mld(), vec({1, 0, 0}), bad), Error);
  }
  SUBCASE("basin independence") {
    // Same A x(0) = (1, 1): equilibria agree.
    const Trajectory a = simulate(two_param_mld(), vec({0.5, 0, 0.5}));
    const Trajectory b = simulate(two_param_mld(), vec({0.1, 0.8, 0.1}));
    const Trajectory c = simulate(two_param_mld(), vec({0.3, 0.4, 0.3}));
    REQUIRE(a.status == SimStatus::Converged);
    REQUIRE(b.status == SimStatus::Converged);
    REQUIRE(c.status == SimStatus::Converged);
    CHECK(linf(a.equilibrium, b.equilibrium) < 1e-6);
    CHECK(linf(a.equilibrium, c.equilibrium) < 1e-6);
  }
  SUBCASE("rate robustness") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> logk(std::log(0.1), std::log(10.0));
    const Trajectory base = simulate(two_param_mld(), vec({0.75, 0.25, 0}));
    for (int k = 0; k < 5; ++k) {
      ReactionNetwork net = two_param_mld();
      const double rate = std::exp(logk(rng));
      net.set_rate(0, rate);
      net.set_rate(1, rate);
      const Trajectory t = simulate(net, vec({0.75, 0.25, 0}));
      REQUIRE(t.status == SimStatus::Converged);
      CHECK(linf(t.equilibrium, base.equilibrium) < 1e-6);
    }
  }
}

TEST_CASE("simulate the estimator network") {
  const DesignMatrix a = two_param_matrix();
  const ReactionNetwork mle = build_mle_network(a, integer_kernel_basis(a), maximal_independent_columns(a));
  const double s = 1.0 / std::sqrt(3.0);
  for (const auto& theta0 : {vec({0, 0}), vec({0.9, 0.1})}) {
    Eigen::VectorXd x0(5);
    x0 << 0.5, 0, 0.5, theta0;
    const Trajectory t = simulate(mle, x0);
    REQUIRE(t.status == SimStatus::Converged);
    CHECK(linf(t.equilibrium.head(3), vec({1.0 / 3, 1.0 / 3, 1.0 / 3})) < 1e-6);
    CHECK(linf(t.equilibrium.tail(2), vec({s, s})) < 1e-5);
  }
}

TEST_CASE("lyapunov_g") {
  CHECK(lyapunov_g(vec({1, 1, 1}), vec({1, 1, 1})) == doctest::Approx(-3));
  CHECK(lyapunov_g(vec({1, 1}), vec({std::exp(1.0), std::exp(1.0)})) == doctest::Approx(-4));
  const Eigen::VectorXd x = vec({0.2, 1.7, 0.0});
  double expected = 0.0;
  for (int i = 0; i < 2; ++i) expected += x(i) * std::log(x(i)) - x(i);
  CHECK(lyapunov_g(x, vec({1, 1, 1})) == doctest::Approx(expected));
  CHECK_THROWS_AS(lyapunov_g(vec({1, 1}), vec({1, 0})), Error);
}

TEST_CASE("monitor_lyapunov") {
  SUBCASE("stationary") {
    Trajectory t;
    t.times = {0, 1, 2};
    t.states = {vec({1, 1, 1}), vec({1, 1, 1}), vec({1, 1, 1})};
    CHECK(monitor_lyapunov(t, vec({1, 1, 1})).max_increase == 0.0);
  }
  SUBCASE("decreasing along a run, increasing when reversed") {
    const Trajectory t = simulate(two_param_mld(), vec({0.5, 0, 0.5}));
    const auto report = monitor_lyapunov(t, vec({1, 1, 1}));
    CHECK(report.values.size() == t.states.size());
    CHECK(report.max_increase <= 1e-12);
    Trajectory reversed = t;
    std::reverse(reversed.states.begin(), reversed.states.end());
    CHECK(monitor_lyapunov(reversed, vec({1, 1, 1})).max_increase > 0.0);
  }
}

TEST_CASE("perturb_rates") {
  const ReactionNetwork net = two_param_mld();
  SUBCASE("zero delta") {
    const auto p = perturb_rates(net, 0.0, 1);
    for (std::size_t k = 0; k < net.reaction_count(); ++k)
      CHECK(p.network.reactions()[k].rate == net.reactions()[k].rate);
  }
  SUBCASE("interval membership and determinism") {
    const auto p = perturb_rates(net, 1e-3, 1);
    const auto q = perturb_rates(net, 1e-3, 1);
    CHECK(p.rates.delta == 1e-3);
    for (std::size_t k = 0; k < net.reaction_count(); ++k) {
      const double r = p.network.reactions()[k].rate;
      CHECK(r > 1 - 1e-3);
      CHECK(r < 1 + 1e-3);
      CHECK(r == p.rates.realized[k]);
      CHECK(p.rates.base[k] == 1.0);
      CHECK(r == q.network.reactions()[k].rate);
    }
    CHECK(perturb_rates(net, 1e-3, 2).rates.realized != p.rates.realized);
  }
  SUBCASE("equilibrium stays close") {
    const Trajectory base = simulate(net, vec({0.75, 0.25, 0}));
    const auto p = perturb_rates(net, 1e-3, 4);
    const Trajectory t = simulate(p.network, vec({0.75, 0.25, 0}));
    REQUIRE(t.status == SimStatus::Converged);
    CHECK(linf(t.equilibrium, base.equilibrium) < 1e-3);
  }
  SUBCASE("too large") {
    CHECK_THROWS_AS(perturb_rates(net, 1.0, 1), Error);
    CHECK_THROWS_AS(perturb_rates(net, -1.0, 1), Error);
  }
}

TEST_CASE("conserved_drift") {
  const DesignMatrix a = two_param_matrix();
  Trajectory still;
  still.times = {0, 1};
  still.states = {vec({0.2, 0.3, 0.5}), vec({0.2, 0.3, 0.5})};
  CHECK(conserved_drift(still, a) == 0.0);

  const double fine = conserved_drift(simulate(two_param_mld(), vec({0.75, 0.25, 0})), a);
  CHECK(fine <= 1e-8);
  SimOptions coarse;
  coarse.rel_tol = 1e-3;
  coarse.abs_tol = 1e-6;
  const double rough = conserved_drift(simulate(two_param_mld(), vec({0.75, 0.25, 0}), coarse), a);
  CHECK(std::isfinite(rough));
  CHECK(rough <= 1e-2);

  Trajectory short_states;
  short_states.times = {0};
  short_states.states = {vec({1, 1})};
  CHECK_THROWS_AS(conserved_drift(short_states, a), Error);
}

TEST_CASE("trajectory_csv") {
  Trajectory t;
  t.times = {0, 0.5};
  t.states = {vec({0.1, 0.9}), vec({1.0 / 3, 2.0 / 3})};
  const std::string csv = trajectory_csv(t, {"X1", "X2"});
  CHECK(csv.find("t,X1,X2\n0,0.10000000000000001,0.90000000000000002\n") == 0);
  CHECK(csv.find("0.5,0.33333333333333331,0.66666666666666663\n") != std::string::npos);
}

TEST_CASE("MassActionSystem jacobian and gross flux") {
  const DesignMatrix a = two_param_matrix();
  const ReactionNetwork net = build_mle_network(a, integer_kernel_basis(a), maximal_independent_columns(a));
  const MassActionSystem system(net);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd x(5);
    for (Eigen::Index i = 0; i < 5; ++i) x(i) = u(rng);
    Eigen::MatrixXd jac;
    system.jacobian(x, jac);
    // Central differences are exact up to round-off for these cubic-at-most
    // polynomials once the step is small.
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < 5; ++j) {
      Eigen::VectorXd up = x, down = x;
      up(j) += h;
      down(j) -= h;
      const Eigen::VectorXd col = (mass_action_rhs(net, up) - mass_action_rhs(net, down)) / (2 * h);
      CHECK((col - jac.col(j)).cwiseAbs().maxCoeff() < 1e-7);
    }
  }
  Eigen::VectorXd gross;
  MassActionSystem(two_param_mld()).gross_flux(vec({0.25, 0.5, 0.25}), gross);
  // Forward flux 1/16 moves X1, X3 by 1 and X2 by 2; backward flux 1/4 likewise.
  CHECK(gross(0) == doctest::Approx(0.3125));
  CHECK(gross(1) == doctest::Approx(0.625));
  CHECK(gross(2) == doctest::Approx(0.3125));
}

TEST_CASE("slow and stiff networks") {
  SUBCASE("slow high-degree reaction converges to its balance point") {
    // 5 X1 <-> 5 X2 at concentrations near 0.1: fluxes around 1e-5 to 1e-6.
    ReactionNetwork net({"X1", "X2"});
    net.add_reaction({{5, 0}, {0, 5}, 1.0});
    net.add_reaction({{0, 5}, {5, 0}, 1.0});
    SimOptions opts;
    opts.t_max = 1e12;
    const Trajectory t = simulate(net, vec({0.15, 0.05}), opts);
    REQUIRE(t.status == SimStatus::Converged);
    CHECK(std::abs(t.equilibrium(0) - 0.1) < 1e-9);
    CHECK(std::abs(t.equilibrium(1) - 0.1) < 1e-9);
  }
  SUBCASE("fast and slow time scales") {
    // A <-> B at rate 1e4 and B <-> C at rate 1e-4: the explicit pair alone
    // would need around 1e8 steps.
    ReactionNetwork net({"A", "B", "C"});
    net.add_reaction({{1, 0, 0}, {0, 1, 0}, 1e4});
    net.add_reaction({{0, 1, 0}, {1, 0, 0}, 1e4});
    net.add_reaction({{0, 1, 0}, {0, 0, 1}, 1e-4});
    net.add_reaction({{0, 0, 1}, {0, 1, 0}, 1e-4});
    SimOptions opts;
    opts.max_steps = 200000;
    const Trajectory t = simulate(net, vec({1, 0, 0}), opts);
    REQUIRE(t.status == SimStatus::Converged);
    CHECK(linf(t.equilibrium, vec({1.0 / 3, 1.0 / 3, 1.0 / 3})) < 1e-8);
    CHECK(std::abs(t.equilibrium.sum() - 1.0) < 1e-12);
  }
  SUBCASE("velocity alone is not enough") {
    // Same slow reaction: the absolute velocity is tiny early on but the net
    // flux is still a large fraction of the gross flux.
    ReactionNetwork net({"X1", "X2"});
    net.add_reaction({{5, 0}, {0, 5}, 1.0});
    net.add_reaction({{0, 5}, {5, 0}, 1.0});
    SimOptions opts;
    opts.equilibrium_tol = 1e-3;
    opts.t_max = 1e12;
    const Trajectory t = simulate(net, vec({0.15, 0.05}), opts);
    REQUIRE(t.status == SimStatus::Converged);
    CHECK(std::abs(t.equilibrium(0) - 0.1) < 1e-6);
    opts.balance_tol = 0.0;
    CHECK_THROWS_AS(simulate(net, vec({0.15, 0.05}), opts), Error);
  }
}
