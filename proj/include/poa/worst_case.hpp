#pragma once

#include <optional>
#include <string>
#include <vector>

#include "poa/game.hpp"
#include "poa/poa_lp.hpp"

namespace poa {

/// A concrete game whose equilibrium-to-optimum ratio realizes a primal
/// theta. Players are indexed 0..n-1; resource copies r(a,x,b,i) sit on a
/// circle of length n for every triple in the support.
struct WorstCaseCertificate {
  GameInstance game;
  Allocation ne_alloc;
  Allocation opt_alloc;
  double claimed_poa = 0.0;
  /// Support actually materialized, in resource-block order.
  ThetaParam theta;
  double pruned_mass = 0.0;
};

inline constexpr double kThetaPruneThreshold = 1e-12;

/// Builds the game with resources of value theta(a,x,b)/n. Player i's
/// equilibrium action takes a+x consecutive copies starting at i, its optimal
/// action b+x consecutive copies starting at (i-b) mod n. Throws
/// std::invalid_argument when theta is infeasible for the primal (residual
/// above 1e-8) or when the optimal allocation would cost nothing.
WorstCaseCertificate construct_worst_case_game(const ThetaParam& theta, const CostFunction& c,
                                               const DistributionRule& f, int n,
                                               double prune = kThetaPruneThreshold);

struct CertificateCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CertificateReport {
  std::vector<CertificateCheck> checks;
  std::optional<std::size_t> deviating_player;
  double ratio = 0.0;
  double potential_formula = 0.0;
  double max_potential_gap = 0.0;
  double pruning_bound = 0.0;

  bool passed() const;
  std::vector<std::string> failures() const;
};

/// Re-derives everything from the stored game: equilibrium by exhaustive
/// unilateral deviation, potential differences against the closed expression
/// (1/n) sum theta [b f(a+x+1)c(a+x+1) - a f(a+x)c(a+x)], the cost ratio, the
/// overlap structure and the symmetry of equilibrium costs.
CertificateReport verify_certificate(const WorstCaseCertificate& cert, double tol = 1e-8);

}  // namespace poa
