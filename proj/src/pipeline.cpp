#include "mlecrn/pipeline.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "mlecrn/crn.hpp"
#include "mlecrn/crn_text.hpp"
#include "mlecrn/error.hpp"

namespace mlecrn {

using ojson = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidData, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Token {
  std::string text;
  std::size_t line;
  std::size_t column;
};

[[noreturn]] void parse_fail(const Token& at, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(at.line) + ", column " +
                                         std::to_string(at.column) + ": " + what);
}

std::int64_t to_integer(const Token& tok) {
  std::int64_t v = 0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) parse_fail(tok, "expected an integer, found '" + tok.text + "'");
  return v;
}

}  // namespace

DesignMatrix parse_matrix_text(std::string_view text) {
  std::vector<std::vector<Token>> lines;
  std::size_t line_no = 0;
  std::size_t start = 0;
  std::size_t last_line = 1;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    last_line = line_no;
    std::size_t first = 0;
    while (first < line.size() && std::isspace(static_cast<unsigned char>(line[first]))) ++first;
    if (first == line.size() || line[first] == '#') continue;

    std::vector<Token> toks;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      if (pos >= line.size()) break;
      const std::size_t s = pos;
      while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      toks.push_back({std::string(line.substr(s, pos - s)), line_no, s + 1});
    }
    lines.push_back(std::move(toks));
  }
  if (lines.empty()) throw Error(ErrorCode::ParseError, "line 1, column 1: missing 'm n' header");

  const auto& header = lines.front();
  if (header.size() != 2) parse_fail(header.front(), "header must be exactly 'm n'");
  const std::int64_t m = to_integer(header[0]);
  const std::int64_t n = to_integer(header[1]);
  if (m < 1 || n < 1) throw Error(ErrorCode::EmptyMatrix, "matrix dimensions must be positive");
  if (static_cast<std::int64_t>(lines.size()) - 1 != m) {
    const Token where = lines.size() > 1 ? lines.back().back() : Token{"", last_line, 1};
    parse_fail(where, "expected " + std::to_string(m) + " matrix rows, found " +
                          std::to_string(lines.size() - 1));
  }

  IntMatrix raw(static_cast<std::size_t>(m), static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const auto& row = lines[i + 1];
    if (static_cast<std::int64_t>(row.size()) != n) {
      parse_fail(row.size() > static_cast<std::size_t>(n) ? row[static_cast<std::size_t>(n)] : row.back(),
                 "expected " + std::to_string(n) + " entries, found " + std::to_string(row.size()));
    }
    for (std::size_t j = 0; j < raw.cols(); ++j) raw(i, j) = to_integer(row[j]);
  }
  return validate_design_matrix(raw);
}

DesignMatrix parse_matrix_file(const std::filesystem::path& path) {
  return parse_matrix_text(read_file(path));
}

DataVector parse_data_vector(std::string_view text) {
  std::vector<std::string> fields;
  auto trimmed = [](std::string_view f) {
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.front()))) f.remove_prefix(1);
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.back()))) f.remove_suffix(1);
    return std::string(f);
  };
  if (!trimmed(text).empty()) {
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = text.find(',', start);
      std::string f = trimmed(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
      if (f.empty()) throw Error(ErrorCode::InvalidData, "empty entry in data vector");
      fields.push_back(std::move(f));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  if (fields.empty()) throw Error(ErrorCode::InvalidData, "data vector is empty");

  const bool real = std::any_of(fields.begin(), fields.end(), [](const std::string& f) {
    return f.find_first_of(".eE") != std::string::npos;
  });
  if (real) {
    std::vector<double> freqs;
    for (const auto& f : fields) {
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (end != f.c_str() + f.size()) throw Error(ErrorCode::InvalidData, "bad frequency '" + f + "'");
      freqs.push_back(v);
    }
    return DataVector::from_frequencies(freqs);
  }
  std::vector<std::int64_t> counts;
  for (const auto& f : fields) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size())
      throw Error(ErrorCode::InvalidData, "bad count '" + f + "'");
    counts.push_back(v);
  }
  return DataVector::from_counts(counts);
}

namespace {

bool is_primitive(const ojson& j) { return !j.is_object() && !j.is_array(); }

void write_json(const ojson& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (j.type()) {
    case ojson::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), is_primitive);
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += inner;
        write_json(e, out, depth + 1);
      }
      out += flat ? "]" : "\n" + pad + "]";
      return;
    }
    case ojson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner + ojson(key).dump() + ": ";
        write_json(value, out, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    default:
      out += j.dump();
  }
}

ojson vector_json(const Eigen::VectorXd& v) {
  ojson arr = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

ojson names_json(const std::vector<std::string>& names, const std::vector<std::size_t>& idx) {
  ojson arr = ojson::array();
  for (std::size_t i : idx) arr.push_back(names.at(i));
  return arr;
}

struct Compiled {
  DesignMatrix a;
  KernelBasis basis;
  ColumnSet columns;
};

Compiled compile(const DesignMatrix& a) {
  return {a, integer_kernel_basis(a), maximal_independent_columns(a)};
}

std::string text_vector(const std::vector<std::string>& names, const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out += "  " + names.at(static_cast<std::size_t>(i)) + " = " + format_double(v(i)) + "\n";
  return out;
}

Eigen::VectorXd parse_theta0(const std::string& text, std::size_t m) {
  if (text == "zero") return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  std::vector<double> values;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size() || !(v >= 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::InvalidData, "bad --theta0 entry '" + field + "'");
    values.push_back(v);
  }
  if (values.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "--theta0 needs " + std::to_string(m) +
                                                  " entries (one per nonzero matrix row)");
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void apply_rate_overrides(ReactionNetwork& net, const std::filesystem::path& path) {
  const ParsedNetwork overrides = parse_crn(read_file(path));
  const auto& names = overrides.network.species();
  for (const Reaction& r : overrides.network.reactions()) {
    IntVector from(net.species_count(), 0), to(net.species_count(), 0);
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (r.reactant[i] == 0 && r.product[i] == 0) continue;
      const std::size_t idx = net.index_of(names[i]);
      if (idx == net.species_count())
        throw Error(ErrorCode::InvalidData, "rate file names unknown species '" + names[i] + "'");
      from[idx] = r.reactant[i];
      to[idx] = r.product[i];
    }
    bool matched = false;
    for (std::size_t k = 0; k < net.reaction_count(); ++k) {
      if (net.reactions()[k].reactant == from && net.reactions()[k].product == to) {
        net.set_rate(k, r.rate);
        matched = true;
      }
    }
    if (!matched) throw Error(ErrorCode::InvalidData, "rate file reaction does not occur in the network");
  }
}

struct SimulationSetup {
  ReactionNetwork network;
  Eigen::VectorXd x0;
  bool estimator = true;
  std::optional<PerturbedRates> perturbation;
};

SimulationSetup prepare_simulation(const RunConfig& cfg, const Compiled& c, const DataVector& u,
                                   const std::string& network) {
  SimulationSetup s;
  s.estimator = network == "mle";
  const Eigen::VectorXd x = u.normalized();
  if (s.estimator) {
    s.network = build_mle_network(c.a, c.basis, c.columns);
    const Eigen::VectorXd theta0 = parse_theta0(cfg.theta0, c.a.rows());
    s.x0.resize(x.size() + theta0.size());
    s.x0 << x, theta0;
  } else {
    s.network = build_mld_network(c.a, c.basis);
    s.x0 = x;
  }
  if (cfg.rates_path) apply_rate_overrides(s.network, *cfg.rates_path);
  if (cfg.delta) {
    PerturbedNetwork p = perturb_rates(s.network, *cfg.delta, cfg.seed);
    s.network = std::move(p.network);
    s.perturbation = std::move(p.rates);
  }
  return s;
}

std::string network_choice(const RunConfig& cfg, const char* fallback) {
  const std::string net = cfg.network.empty() ? fallback : cfg.network;
  if (net != "mld" && net != "mle")
    throw Error(ErrorCode::InvalidData, "--network must be 'mld' or 'mle'");
  return net;
}

void check_data_length(const DesignMatrix& a, const DataVector& u) {
  if (u.size() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "data vector has " + std::to_string(u.size()) +
                                                  " entries but the matrix has " +
                                                  std::to_string(a.cols()) + " columns");
  }
}

void warn_dropped_rows(const DesignMatrix& a, RunResult& result) {
  for (std::size_t i : a.dropped_rows())
    result.err += "warning: dropped zero row " + std::to_string(i + 1) + " of the design matrix\n";
}

void emit(RunResult& result, const RunConfig& cfg, const ojson& j, const std::string& text) {
  result.out += cfg.format == OutputFormat::Json ? dump_json(j) + "\n" : text;
}

int run_compile(const RunConfig& cfg, RunResult& result) {
  const Compiled c = compile(parse_matrix_file(cfg.matrix_path));
  warn_dropped_rows(c.a, result);
  const ReactionNetwork mld = build_mld_network(c.a, c.basis);
  const std::string mld_text = emit_crn(mld);
  std::string mle_text;
  if (c.a.has_negative_entries()) {
    result.err += "warning: the design matrix has negative entries; only the distribution network is emitted\n";
  } else {
    mle_text = emit_crn(build_mle_network(c.a, c.basis, c.columns));
  }

  ojson j;
  ojson basis = ojson::array();
  for (const auto& b : c.basis.vectors) basis.push_back(b);
  ojson cols = ojson::array();
  for (std::size_t k : c.columns.indices) cols.push_back(k + 1);
  j["kernel_basis"] = basis;
  j["independent_columns"] = cols;
  j["mld"] = mld_text;
  j["mle"] = mle_text.empty() ? ojson() : ojson(mle_text);

  std::string text = "# distribution network\n" + mld_text;
  if (!mle_text.empty()) text += "# estimator network\n" + mle_text;
  emit(result, cfg, j, text);
  result.artifacts["mld.crn"] = mld_text;
  if (!mle_text.empty()) result.artifacts["mle.crn"] = mle_text;
  return 0;
}

int run_simulate(const RunConfig& cfg, RunResult& result) {
  const Compiled c = compile(parse_matrix_file(cfg.matrix_path));
  warn_dropped_rows(c.a, result);
  const DataVector u = parse_data_vector(cfg.data);
  check_data_length(c.a, u);
  const SimulationSetup s = prepare_simulation(cfg, c, u, network_choice(cfg, "mle"));
  const Trajectory traj = simulate(s.network, s.x0, cfg.sim);

  const auto n = static_cast<Eigen::Index>(c.a.cols());
  const Eigen::VectorXd& last = traj.final_state();
  ojson j;
  j["status"] = std::string(to_string(traj.status));
  j["time"] = traj.final_time();
  j["accepted_steps"] = traj.accepted_steps;
  j["rejected_steps"] = traj.rejected_steps;
  j["species"] = s.network.species();
  j["state"] = vector_json(last);
  j["x"] = vector_json(last.head(n));
  if (s.estimator) j["theta"] = vector_json(last.tail(last.size() - n));
  j["conserved_drift"] = conserved_drift(traj, c.a);
  const Eigen::VectorXd xhat = last.head(n);
  j["birch_residual"] = (xhat.array() > 0.0).all() ? birch_residual(c.basis, xhat)
                                                   : std::numeric_limits<double>::infinity();
  j["moment_residual"] = moment_residual(c.a, xhat, u);
  if (s.perturbation) {
    j["perturbation"] = {{"delta", s.perturbation->delta},
                         {"seed", cfg.seed},
                         {"rates", s.perturbation->realized}};
  }
  if (!traj.note.empty()) j["note"] = traj.note;

  std::string text = "status: " + std::string(to_string(traj.status)) + " at t = " +
                     format_double(traj.final_time()) + "\n" +
                     text_vector(s.network.species(), last);
  emit(result, cfg, j, text);
  result.artifacts["trajectory.csv"] = trajectory_csv(traj, s.network.species());
  result.artifacts["equilibrium.json"] = dump_json(j) + "\n";
  return traj.status == SimStatus::Converged ? 0 : 1;
}

int run_mle(const RunConfig& cfg, RunResult& result) {
  const DesignMatrix a = parse_matrix_file(cfg.matrix_path);
  warn_dropped_rows(a, result);
  const DataVector u = parse_data_vector(cfg.data);
  check_data_length(a, u);
  const MleResult r = maximum_likelihood(a, u);
  const ojson j = to_json(r);
  std::string text = "maximum likelihood distribution:\n" + text_vector(x_species_names(a.cols()), r.p_hat) +
                     "maximum likelihood estimator" + (r.theta_unique ? "" : " (not unique)") + ":\n" +
                     text_vector(theta_species_names(a.rows()), r.theta_hat) +
                     "log-likelihood: " + format_double(r.log_likelihood) + "\n";
  emit(result, cfg, j, text);
  result.artifacts["mle.json"] = dump_json(j) + "\n";
  return 0;
}

int run_verify(const RunConfig& cfg, RunResult& result) {
  const Compiled c = compile(parse_matrix_file(cfg.matrix_path));
  warn_dropped_rows(c.a, result);
  const DataVector u = parse_data_vector(cfg.data);
  check_data_length(c.a, u);
  const SimulationSetup s = prepare_simulation(cfg, c, u, network_choice(cfg, "mle"));
  const Trajectory traj = simulate(s.network, s.x0, cfg.sim);
  const MleResult oracle = maximum_likelihood(c.a, u);

  const auto n = static_cast<Eigen::Index>(c.a.cols());
  const Eigen::VectorXd xhat = traj.final_state().head(n);
  const EquivalenceReport rep = verify_equivalence(c.a, u, xhat, oracle.p_hat, cfg.tolerance);
  const bool converged = traj.status == SimStatus::Converged;

  std::optional<double> theta_distance;
  bool theta_ok = true;
  if (s.estimator && oracle.theta_unique) {
    const Eigen::VectorXd theta = traj.final_state().tail(traj.final_state().size() - n);
    theta_distance = (theta - oracle.theta_hat).cwiseAbs().maxCoeff();
    theta_ok = *theta_distance <= cfg.tolerance;
  }
  const bool pass = converged && rep.pass && theta_ok;

  ojson j;
  j["pass"] = pass;
  j["tolerance"] = rep.tolerance;
  j["simulation_status"] = std::string(to_string(traj.status));
  j["simulation_time"] = traj.final_time();
  j["linf_distance"] = rep.linf_distance;
  j["theta_linf_distance"] = theta_distance ? ojson(*theta_distance) : ojson();
  j["simulated"] = {{"x", vector_json(xhat)},
                    {"birch_residual", rep.simulated_birch_residual},
                    {"moment_residual", rep.simulated_moment_residual}};
  if (s.estimator) j["simulated"]["theta"] = vector_json(traj.final_state().tail(traj.final_state().size() - n));
  j["oracle"] = to_json(oracle);

  std::string text = std::string(pass ? "PASS" : "FAIL") + ": simulation " +
                     std::string(to_string(traj.status)) + ", L-inf distance " +
                     format_double(rep.linf_distance) + " (tolerance " + format_double(rep.tolerance) + ")\n";
  if (theta_distance) text += "theta L-inf distance " + format_double(*theta_distance) + "\n";
  text += "simulated birch residual " + format_double(rep.simulated_birch_residual) +
          ", moment residual " + format_double(rep.simulated_moment_residual) + "\n";
  emit(result, cfg, j, text);
  result.artifacts["verify.json"] = dump_json(j) + "\n";
  return pass ? 0 : 1;
}

int run_siphons(const RunConfig& cfg, RunResult& result) {
  const Compiled c = compile(parse_matrix_file(cfg.matrix_path));
  warn_dropped_rows(c.a, result);
  const std::string which = network_choice(cfg, "mld");
  const ReactionNetwork net = which == "mle" ? build_mle_network(c.a, c.basis, c.columns)
                                             : build_mld_network(c.a, c.basis);
  const std::vector<Siphon> siphons = enumerate_siphons(net);

  ojson list = ojson::array();
  std::string text;
  bool any_critical = false;
  for (const Siphon& s : siphons) {
    list.push_back({{"members", names_json(net.species(), s.members)}, {"critical", s.critical}});
    any_critical = any_critical || s.critical;
    text += "{";
    for (std::size_t k = 0; k < s.members.size(); ++k)
      text += (k ? ", " : "") + net.species()[s.members[k]];
    text += std::string("}") + (s.critical ? "  critical" : "") + "\n";
  }
  ojson j;
  j["network"] = which;
  j["siphons"] = list;
  j["any_critical"] = any_critical;
  j["weakly_reversible"] = is_weakly_reversible(net);
  emit(result, cfg, j, text);
  result.artifacts["siphons.json"] = dump_json(j) + "\n";
  return 0;
}

bool is_input_error(ErrorCode code) {
  return code != ErrorCode::NonConvergence && code != ErrorCode::Internal;
}

}  // namespace

std::string dump_json(const ojson& j) {
  std::string out;
  write_json(j, out, 0);
  return out;
}

ojson to_json(const MleResult& r) {
  ojson j;
  j["p_hat"] = vector_json(r.p_hat);
  j["theta_hat"] = vector_json(r.theta_hat);
  j["log_likelihood"] = r.log_likelihood;
  j["residuals"] = {{"birch", r.birch_residual}, {"moment", r.moment_residual}};
  j["flags"] = {{"theta_unique", r.theta_unique}};
  return j;
}

RunResult run_pipeline(const RunConfig& cfg) {
  RunResult result;
  try {
    if (cfg.subcommand == "compile") {
      result.exit_code = run_compile(cfg, result);
    } else if (cfg.subcommand == "simulate") {
      result.exit_code = run_simulate(cfg, result);
    } else if (cfg.subcommand == "mle") {
      result.exit_code = run_mle(cfg, result);
    } else if (cfg.subcommand == "verify") {
      result.exit_code = run_verify(cfg, result);
    } else if (cfg.subcommand == "siphons") {
      result.exit_code = run_siphons(cfg, result);
    } else {
      throw Error(ErrorCode::InvalidData, "unknown subcommand '" + cfg.subcommand + "'");
    }
    if (cfg.out_dir) {
      std::filesystem::create_directories(*cfg.out_dir);
      for (const auto& [name, contents] : result.artifacts) {
        std::ofstream out(*cfg.out_dir / name, std::ios::binary);
        if (!out) throw Error(ErrorCode::InvalidData, "cannot write '" + (*cfg.out_dir / name).string() + "'");
        out << contents;
      }
    }
  } catch (const Error& e) {
    result.exit_code = is_input_error(e.code()) ? 2 : 1;
    result.out.clear();
    if (cfg.format == OutputFormat::Json) {
      ojson j;
      j["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
      result.out = dump_json(j) + "\n";
    }
    result.err += "error: " + std::string(to_string(e.code())) + ": " + e.what() + "\n";
  } catch (const std::filesystem::filesystem_error& e) {
    result.exit_code = 2;
    result.err += std::string("error: ") + e.what() + "\n";
  }
  return result;
}

}  // namespace mlecrn
