#pragma once

#include <string>
#include <vector>

#include "poa/cost_model.hpp"
#include "poa/lp.hpp"

namespace poa {

struct DesignResult {
  /// Designed rule rescaled so that rule(1) = 1.
  DistributionRule rule;
  /// Optimal scaled rule f~ = lambda f as returned by the program.
  std::vector<double> rule_raw;
  double mu_star = 0.0;
  double poa = 1.0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Variables f~(1..n) >= 0 followed by mu (free); maximize mu subject to, for
/// every boundary triple,
///   1{b+x>=1} c(b+x) - mu 1{a+x>=1} c(a+x) + a f~(a+x) c(a+x) - b f~(a+x+1) c(a+x+1) >= 0,
/// with f~(n+1) read as f~(n) and the b term dropped when b = 0.
lp::LinearProgram build_design_lp(const CostFunction& c, int n);

/// Rule minimizing the price of anarchy over all nonnegative rules.
DesignResult design_optimal_rule(const CostFunction& c, int n, const lp::SolverOptions& options = {});

struct NamedRule {
  std::string name;
  DistributionRule rule;
};

struct DominanceEntry {
  std::string name;
  double poa = 0.0;
  double ratio = 0.0;  // poa / designed poa
  bool dominated = false;  // designed rule is no worse than this one
};

struct DominanceReport {
  double designed_poa = 0.0;
  std::vector<DominanceEntry> entries;
  bool holds = true;
};

/// Prices every rule with the dual program and checks the designed rule is no
/// worse than any of them, up to tol.
DominanceReport verify_dominance(const CostFunction& c, int n, const std::vector<NamedRule>& rules, double tol = 1e-6,
                                 const lp::SolverOptions& options = {});

}  // namespace poa
