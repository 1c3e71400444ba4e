#pragma once

// Mass-action reaction networks: the two constructions that compile a design
// matrix into a distribution network (reversible kernel reactions) and an
// estimator network (kernel reactions plus parameter synthesis/decay), and the
// structural analyses used to certify them.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlecrn/matrixcore.hpp"

namespace mlecrn {

enum class ReactionOrigin {
  Unspecified,
  Kernel,        // from a kernel basis vector (one per direction)
  ParameterDecay,  // sum_i a_ij T_i -> 0
  ParameterSynthesis,  // X_j -> X_j + sum_i a_ij T_i
};

struct Reaction {
  IntVector reactant;
  IntVector product;
  double rate = 1.0;
  ReactionOrigin origin = ReactionOrigin::Unspecified;
  std::size_t source = 0;  // kernel vector or column index, per origin

  IntVector net_change() const;
};

class ReactionNetwork {
 public:
  ReactionNetwork() = default;
  explicit ReactionNetwork(std::vector<std::string> species);

  const std::vector<std::string>& species() const noexcept { return species_; }
  std::size_t species_count() const noexcept { return species_.size(); }
  const std::vector<Reaction>& reactions() const noexcept { return reactions_; }
  std::size_t reaction_count() const noexcept { return reactions_.size(); }

  // Returns species_count() when the name is unknown.
  std::size_t index_of(const std::string& name) const;

  // Validates dimensions, nonnegativity, y != y' and rate > 0.
  void add_reaction(Reaction r);

  void set_rate(std::size_t reaction, double rate);

 private:
  std::vector<std::string> species_;
  std::vector<Reaction> reactions_;
};

// Species X1..Xn; each kernel vector b gives the pair
// sum_{b_j>0} b_j X_j <-> sum_{b_j<0} -b_j X_j, both at rate 1.
ReactionNetwork build_mld_network(const DesignMatrix& a, const KernelBasis& basis);

// Species X1..Xn, T1..Tm. Throws NegativeStoichiometry when a selected column
// has a negative entry.
ReactionNetwork build_mle_network(const DesignMatrix& a, const KernelBasis& basis,
                                  const ColumnSet& columns);

struct StoichiometricSubspace {
  Eigen::MatrixXd basis;      // orthonormal columns spanning H
  Eigen::MatrixXd orthogonal;  // orthonormal columns spanning H-perp
  std::size_t dimension() const { return static_cast<std::size_t>(basis.cols()); }
};

StoichiometricSubspace stoichiometric_subspace(const ReactionNetwork& net);

struct Siphon {
  std::vector<std::size_t> members;  // sorted species indices
  bool minimal = false;
  bool critical = false;
};

bool is_siphon(const ReactionNetwork& net, const std::vector<std::size_t>& members);

inline constexpr std::size_t kDefaultSiphonSpeciesLimit = 20;

// All inclusion-minimal nonempty siphons, each flagged for criticality.
// Throws TooManySpecies above max_species.
std::vector<Siphon> enumerate_siphons(const ReactionNetwork& net,
                                      std::size_t max_species = kDefaultSiphonSpeciesLimit);

// True iff the only nonnegative vector of H-perp supported inside the siphon
// is zero.
bool is_critical_siphon(const ReactionNetwork& net, const Siphon& siphon);

bool is_weakly_reversible(const ReactionNetwork& net);

struct BalanceResiduals {
  double detailed = 0.0;  // infinity when some reaction has no reverse
  double complex = 0.0;
};

BalanceResiduals balance_residuals(const ReactionNetwork& net, const Eigen::VectorXd& alpha);

// prod_i x_i^{y_i} with 0^0 = 1.
double monomial(const IntVector& exponents, const Eigen::VectorXd& x);

std::vector<std::string> x_species_names(std::size_t n);
std::vector<std::string> theta_species_names(std::size_t m);

}  // namespace mlecrn
