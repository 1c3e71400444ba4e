// mlecrn: compile design matrices into mass-action networks that compute
// maximum likelihood estimates, simulate them, and check against an
// optimization oracle.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mlecrn/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Reaction networks for log-linear maximum likelihood estimation"};
  app.require_subcommand(1);

  mlecrn::RunConfig cfg;
  std::string format = "text";
  std::string out_dir;
  std::string rates;

  auto add_common = [&](CLI::App* sub, bool needs_data) {
    sub->add_option("--matrix", cfg.matrix_path, "design matrix file ('m n' header, then rows)")->required();
    if (needs_data) sub->add_option("--data", cfg.data, "counts like \"3,1,0\" or frequencies summing to 1")->required();
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--out", out_dir, "directory for output artifacts");
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--theta0", cfg.theta0, "initial parameter concentrations: zero or a list");
    sub->add_option("--rates", rates, "CRN text file whose rates override matching reactions");
    sub->add_option("--delta", cfg.delta, "perturb every rate uniformly within (k-delta, k+delta)");
    sub->add_option("--seed", cfg.seed, "seed for --delta");
    sub->add_option("--tmax", cfg.sim.t_max, "integration time limit");
    sub->add_option("--rtol", cfg.sim.rel_tol, "relative error tolerance");
    sub->add_option("--atol", cfg.sim.abs_tol, "absolute error tolerance");
    sub->add_option("--eqtol", cfg.sim.equilibrium_tol, "relative velocity threshold for equilibrium");
    sub->add_option("--baltol", cfg.sim.balance_tol, "net-to-gross flux threshold for equilibrium");
    sub->add_option("--network", cfg.network, "mle (default) or mld")->check(CLI::IsMember({"mld", "mle"}));
  };

  auto* compile = app.add_subcommand("compile", "emit the distribution and estimator networks");
  add_common(compile, false);
  auto* simulate = app.add_subcommand("simulate", "integrate the network from the observed frequencies");
  add_common(simulate, true);
  add_sim(simulate);
  auto* mle = app.add_subcommand("mle", "solve the maximum likelihood problem by convex optimization");
  add_common(mle, true);
  auto* verify = app.add_subcommand("verify", "simulate and compare against the optimization oracle");
  add_common(verify, true);
  add_sim(verify);
  verify->add_option("--tolerance", cfg.tolerance, "L-inf tolerance for agreement");
  auto* siphons = app.add_subcommand("siphons", "list minimal siphons with criticality flags");
  add_common(siphons, false);
  siphons->add_option("--network", cfg.network, "mld (default) or mle")->check(CLI::IsMember({"mld", "mle"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  cfg.subcommand = app.get_subcommands().front()->get_name();
  cfg.format = format == "json" ? mlecrn::OutputFormat::Json : mlecrn::OutputFormat::Text;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!rates.empty()) cfg.rates_path = rates;

  const mlecrn::RunResult result = mlecrn::run_pipeline(cfg);
  std::cout << result.out;
  std::cerr << result.err;
  return result.exit_code;
}
