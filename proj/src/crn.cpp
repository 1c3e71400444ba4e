#include "mlecrn/crn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <utility>

#include "mlecrn/error.hpp"
#include "mlecrn/simplex.hpp"

namespace mlecrn {

IntVector Reaction::net_change() const {
  IntVector d(product.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = product[i] - reactant[i];
  return d;
}

ReactionNetwork::ReactionNetwork(std::vector<std::string> species) : species_(std::move(species)) {}

std::size_t ReactionNetwork::index_of(const std::string& name) const {
  const auto it = std::find(species_.begin(), species_.end(), name);
  return static_cast<std::size_t>(it - species_.begin());
}

void ReactionNetwork::add_reaction(Reaction r) {
  const std::size_t n = species_.size();
  if (r.reactant.size() != n || r.product.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "reaction references undeclared species");
  for (std::size_t i = 0; i < n; ++i) {
    if (r.reactant[i] < 0 || r.product[i] < 0)
      throw Error(ErrorCode::NegativeStoichiometry, "stoichiometric coefficients must be nonnegative");
  }
  if (r.reactant == r.product)
    throw Error(ErrorCode::InvalidData, "reaction has identical reactant and product complexes");
  if (!(r.rate > 0.0) || !std::isfinite(r.rate))
    throw Error(ErrorCode::InvalidData, "reaction rates must be positive and finite");
  reactions_.push_back(std::move(r));
}

void ReactionNetwork::set_rate(std::size_t reaction, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw Error(ErrorCode::InvalidData, "reaction rates must be positive and finite");
  reactions_.at(reaction).rate = rate;
}

std::vector<std::string> x_species_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < n; ++j) names.push_back("X" + std::to_string(j + 1));
  return names;
}

std::vector<std::string> theta_species_names(std::size_t m) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < m; ++i) names.push_back("T" + std::to_string(i + 1));
  return names;
}

namespace {

void add_kernel_reactions(ReactionNetwork& net, const KernelBasis& basis, std::size_t n) {
  const std::size_t total = net.species_count();
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const IntVector& b = basis.vectors[k];
    if (b.size() != n)
      throw Error(ErrorCode::DimensionMismatch, "kernel vector length does not match matrix columns");
    IntVector left(total, 0), right(total, 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (b[j] > 0) left[j] = b[j];
      if (b[j] < 0) right[j] = -b[j];
    }
    net.add_reaction({left, right, 1.0, ReactionOrigin::Kernel, k});
    net.add_reaction({right, left, 1.0, ReactionOrigin::Kernel, k});
  }
}

}  // namespace

ReactionNetwork build_mld_network(const DesignMatrix& a, const KernelBasis& basis) {
  ReactionNetwork net(x_species_names(a.cols()));
  add_kernel_reactions(net, basis, a.cols());
  return net;
}

ReactionNetwork build_mle_network(const DesignMatrix& a, const KernelBasis& basis,
                                  const ColumnSet& columns) {
  const std::size_t n = a.cols();
  const std::size_t m = a.rows();
  for (std::size_t j : columns.indices) {
    if (j >= n) throw Error(ErrorCode::DimensionMismatch, "column index out of range");
    for (std::size_t i = 0; i < m; ++i) {
      if (a(i, j) < 0) {
        throw Error(ErrorCode::NegativeStoichiometry,
                    "column " + std::to_string(j + 1) + " has a negative entry in row " +
                        std::to_string(i + 1) + "; parameter reactions need nonnegative coefficients");
      }
    }
  }

  std::vector<std::string> species = x_species_names(n);
  for (auto& name : theta_species_names(m)) species.push_back(std::move(name));
  ReactionNetwork net(std::move(species));
  add_kernel_reactions(net, basis, n);

  for (std::size_t j : columns.indices) {
    IntVector thetas(n + m, 0);
    for (std::size_t i = 0; i < m; ++i) thetas[n + i] = a(i, j);
    net.add_reaction({thetas, IntVector(n + m, 0), 1.0, ReactionOrigin::ParameterDecay, j});

    IntVector catalyst(n + m, 0);
    catalyst[j] = 1;
    IntVector produced = thetas;
    produced[j] = 1;
    net.add_reaction({catalyst, produced, 1.0, ReactionOrigin::ParameterSynthesis, j});
  }
  return net;
}

StoichiometricSubspace stoichiometric_subspace(const ReactionNetwork& net) {
  const auto n = static_cast<Eigen::Index>(net.species_count());
  const auto r = static_cast<Eigen::Index>(net.reaction_count());
  StoichiometricSubspace out;
  if (r == 0 || n == 0) {
    out.basis = Eigen::MatrixXd::Zero(n, 0);
    out.orthogonal = Eigen::MatrixXd::Identity(n, n);
    return out;
  }
  Eigen::MatrixXd s(n, r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const IntVector d = net.reactions()[k].net_change();
    for (Eigen::Index i = 0; i < n; ++i) s(i, k) = static_cast<double>(d[i]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeFullU);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = 1e-10 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index dim = 0;
  while (dim < sv.size() && sv(dim) > cutoff) ++dim;
  out.basis = svd.matrixU().leftCols(dim);
  out.orthogonal = svd.matrixU().rightCols(n - dim);
  return out;
}

namespace {

struct ReactionMasks {
  std::uint64_t consumed = 0;
  std::uint64_t produced = 0;
};

std::vector<ReactionMasks> reaction_masks(const ReactionNetwork& net) {
  std::vector<ReactionMasks> masks;
  for (const Reaction& r : net.reactions()) {
    ReactionMasks m;
    for (std::size_t i = 0; i < net.species_count(); ++i) {
      if (r.reactant[i] > 0) m.consumed |= std::uint64_t{1} << i;
      if (r.product[i] > 0) m.produced |= std::uint64_t{1} << i;
    }
    masks.push_back(m);
  }
  return masks;
}

bool siphon_condition(const std::vector<ReactionMasks>& masks, std::uint64_t set) {
  for (const auto& m : masks) {
    if ((m.produced & set) != 0 && (m.consumed & set) == 0) return false;
  }
  return true;
}

std::vector<std::size_t> members_of(std::uint64_t set) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; set != 0; ++i, set >>= 1)
    if (set & 1) out.push_back(i);
  return out;
}

}  // namespace

bool is_siphon(const ReactionNetwork& net, const std::vector<std::size_t>& members) {
  if (members.empty()) return false;
  std::vector<bool> in(net.species_count(), false);
  for (std::size_t i : members) {
    if (i >= net.species_count()) throw Error(ErrorCode::DimensionMismatch, "siphon member out of range");
    in[i] = true;
  }
  for (const Reaction& r : net.reactions()) {
    bool produces = false;
    bool consumes = false;
    for (std::size_t i = 0; i < net.species_count(); ++i) {
      if (!in[i]) continue;
      produces = produces || r.product[i] > 0;
      consumes = consumes || r.reactant[i] > 0;
    }
    if (produces && !consumes) return false;
  }
  return true;
}

std::vector<Siphon> enumerate_siphons(const ReactionNetwork& net, std::size_t max_species) {
  const std::size_t n = net.species_count();
  if (n > max_species || n > 62) {
    throw Error(ErrorCode::TooManySpecies, "siphon enumeration is limited to " +
                                               std::to_string(std::min<std::size_t>(max_species, 62)) +
                                               " species; network has " + std::to_string(n));
  }
  const auto masks = reaction_masks(net);
  std::vector<std::uint64_t> found;
  // Increasing cardinality guarantees every siphon found is minimal once its
  // supersets of earlier finds are skipped.
  for (std::size_t size = 1; size <= n; ++size) {
    std::uint64_t set = (std::uint64_t{1} << size) - 1;
    const std::uint64_t limit = std::uint64_t{1} << n;
    while (set < limit) {
      const bool contains_found = std::any_of(found.begin(), found.end(),
                                              [set](std::uint64_t f) { return (f & set) == f; });
      if (!contains_found && siphon_condition(masks, set)) found.push_back(set);
      // Gosper's hack: next subset with the same popcount.
      const std::uint64_t low = set & -set;
      const std::uint64_t ripple = set + low;
      set = (((ripple ^ set) >> 2) / low) | ripple;
    }
  }
  std::vector<Siphon> out;
  for (std::uint64_t f : found) {
    Siphon s{members_of(f), true, false};
    s.critical = is_critical_siphon(net, s);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(),
            [](const Siphon& a, const Siphon& b) { return a.members < b.members; });
  return out;
}

bool is_critical_siphon(const ReactionNetwork& net, const Siphon& siphon) {
  const auto t = static_cast<Eigen::Index>(siphon.members.size());
  if (t == 0) return true;
  const auto r = static_cast<Eigen::Index>(net.reaction_count());

  // maximize sum v  s.t.  d . v = 0 for every reaction d,  sum v <= 1,  v >= 0,
  // with v living only on the siphon's species.
  lp::LinearProgram program;
  program.objective = Eigen::VectorXd::Ones(t);
  program.eq = Eigen::MatrixXd::Zero(r, t);
  program.eq_rhs = Eigen::VectorXd::Zero(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const IntVector d = net.reactions()[k].net_change();
    for (Eigen::Index c = 0; c < t; ++c) program.eq(k, c) = static_cast<double>(d.at(siphon.members[c]));
  }
  program.le = Eigen::MatrixXd::Ones(1, t);
  program.le_rhs = Eigen::VectorXd::Ones(1);

  const lp::LpSolution sol = lp::maximize(program);
  if (sol.status != lp::LpStatus::Optimal)
    throw Error(ErrorCode::Internal, "criticality program did not reach an optimum");
  return sol.value <= 1e-9;
}

namespace {

struct ComplexGraph {
  std::vector<IntVector> complexes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // one per reaction
};

ComplexGraph complex_graph(const ReactionNetwork& net) {
  ComplexGraph g;
  std::map<IntVector, std::size_t> ids;
  auto id = [&](const IntVector& y) {
    auto [it, inserted] = ids.emplace(y, g.complexes.size());
    if (inserted) g.complexes.push_back(y);
    return it->second;
  };
  for (const Reaction& r : net.reactions()) {
    const std::size_t from = id(r.reactant);
    const std::size_t to = id(r.product);
    g.edges.emplace_back(from, to);
  }
  return g;
}

}  // namespace

bool is_weakly_reversible(const ReactionNetwork& net) {
  const ComplexGraph g = complex_graph(net);
  const std::size_t c = g.complexes.size();
  std::vector<std::vector<std::size_t>> adj(c);
  for (auto [from, to] : g.edges) adj[from].push_back(to);

  auto reaches = [&](std::size_t src, std::size_t dst) {
    std::vector<bool> seen(c, false);
    std::queue<std::size_t> q;
    q.push(src);
    seen[src] = true;
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      if (v == dst) return true;
      for (std::size_t w : adj[v]) {
        if (!seen[w]) {
          seen[w] = true;
          q.push(w);
        }
      }
    }
    return false;
  };
  for (auto [from, to] : g.edges)
    if (!reaches(to, from)) return false;
  return true;
}

double monomial(const IntVector& exponents, const Eigen::VectorXd& x) {
  double v = 1.0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    const std::int64_t e = exponents[i];
    if (e == 0) continue;
    const double xi = x(static_cast<Eigen::Index>(i));
    double p = xi;
    for (std::int64_t k = 1; k < e; ++k) p *= xi;
    v *= p;
  }
  return v;
}

BalanceResiduals balance_residuals(const ReactionNetwork& net, const Eigen::VectorXd& alpha) {
  if (static_cast<std::size_t>(alpha.size()) != net.species_count())
    throw Error(ErrorCode::DimensionMismatch, "alpha length does not match species count");
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (!(alpha(i) > 0.0))
      throw Error(ErrorCode::NonPositiveAlpha, "balance point must be strictly positive");
  }

  const ComplexGraph g = complex_graph(net);
  std::map<std::pair<std::size_t, std::size_t>, double> rate;
  for (std::size_t k = 0; k < g.edges.size(); ++k) rate[g.edges[k]] += net.reactions()[k].rate;

  std::vector<double> mono(g.complexes.size());
  for (std::size_t c = 0; c < g.complexes.size(); ++c) mono[c] = monomial(g.complexes[c], alpha);

  BalanceResiduals out;
  std::vector<double> outflow(g.complexes.size(), 0.0), inflow(g.complexes.size(), 0.0);
  for (const auto& [edge, k] : rate) {
    const auto [from, to] = edge;
    const double flux = k * mono[from];
    outflow[from] += flux;
    inflow[to] += flux;
    const auto reverse = rate.find({to, from});
    if (reverse == rate.end()) {
      out.detailed = std::numeric_limits<double>::infinity();
    } else {
      out.detailed = std::max(out.detailed, std::abs(flux - reverse->second * mono[to]));
    }
  }
  for (std::size_t c = 0; c < g.complexes.size(); ++c)
    out.complex = std::max(out.complex, std::abs(outflow[c] - inflow[c]));
  return out;
}

}  // namespace mlecrn
