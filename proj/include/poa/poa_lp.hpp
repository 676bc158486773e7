#pragma once

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "poa/cost_model.hpp"
#include "poa/lp.hpp"

namespace poa {

/// Overlap type of a resource between an equilibrium and an optimal
/// allocation: a users only at equilibrium, x at both, b only at optimum.
struct IndexTriple {
  int a = 0;
  int x = 0;
  int b = 0;

  int total() const { return a + x + b; }
  int ne_load() const { return a + x; }
  int opt_load() const { return b + x; }

  friend auto operator<=>(const IndexTriple&, const IndexTriple&) = default;
};

std::string to_string(const IndexTriple& t);

/// All triples with 1 <= a+x+b <= n, lexicographic in (a, x, b).
std::vector<IndexTriple> index_set(int n);
/// Triples of index_set(n) on its bounding planes: a*x*b = 0 or a+x+b = n.
std::vector<IndexTriple> boundary_index_set(int n);
bool on_boundary(const IndexTriple& t, int n);
/// (n+1)(n+2)(n+3)/6 - 1.
std::size_t index_set_size(int n);

/// Aggregate resource value per overlap type.
using ThetaParam = std::map<IndexTriple, double>;

enum class PoaMethod {
  Primal,
  Dual,
  DualFullIndex,
  ReducedDual,
  ExplicitMin,
  ConvexProgram,
  PrintedShapley,
  PrintedMarginal,
};

std::string to_string(PoaMethod method);

struct PoaResult {
  double poa = 1.0;
  double c_star = 1.0;
  PoaMethod method = PoaMethod::Dual;
  std::optional<double> lambda_star;
  std::optional<double> mu_star;
  std::optional<ThetaParam> theta;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Raised when a method's structural hypothesis does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// e(a,x,b) = a f(a+x) c(a+x) - b f(a+x+1) c(a+x+1); the b term vanishes
/// structurally when b = 0, so c(n+1) is never read.
double deviation_coefficient(const IndexTriple& t, const DistributionRule& f, const CostFunction& c);

// --- primal ----------------------------------------------------------------

/// min sum 1{b+x>=1} c(b+x) theta  s.t.  sum e(a,x,b) theta <= 0,
/// sum 1{a+x>=1} c(a+x) theta = 1, theta >= 0 over index_set(n).
/// Variables follow index_set(n) order.
lp::LinearProgram build_primal(const CostFunction& c, const DistributionRule& f, int n);
PoaResult compute_poa_primal(const CostFunction& c, const DistributionRule& f, int n,
                             const lp::SolverOptions& options = {});

// --- dual ------------------------------------------------------------------

enum class IndexScope { Boundary, Full };

/// max mu over (lambda >= 0, mu free) with one row per triple:
/// 1{b+x>=1} c(b+x) - mu 1{a+x>=1} c(a+x) + lambda e(a,x,b) >= 0.
/// Variable 0 is lambda, variable 1 is mu.
lp::LinearProgram build_dual(const CostFunction& c, const DistributionRule& f, int n,
                             IndexScope scope = IndexScope::Boundary);
lp::LinearProgram build_dual(const CostFunction& c, const DistributionRule& f, int n,
                             std::span<const IndexTriple> triples);
/// The reference method.
PoaResult compute_poa_dual(const CostFunction& c, const DistributionRule& f, int n,
                           IndexScope scope = IndexScope::Boundary, const lp::SolverOptions& options = {});

/// Dual restricted to the (j, l) grid, valid when f(j)c(j) is nondecreasing:
/// mu c(j) <= c(l) + lambda [j f(j)c(j) - l f(j+1)c(j+1)]            for 1 <= j+l <= n,
/// mu c(j) <= c(l) + lambda [(n-l) f(j)c(j) - (n-j) f(j+1)c(j+1)]    for j+l > n.
/// Rows are ordered lexicographically in (j, l); there are (n+1)^2 - 1.
lp::LinearProgram build_reduced_dual_nondecreasing(const CostFunction& c, const DistributionRule& f, int n);
PoaResult compute_poa_reduced(const CostFunction& c, const DistributionRule& f, int n,
                              const lp::SolverOptions& options = {});

// --- closed forms ------------------------------------------------------------

/// Hypothesis of the lambda* formula: f(j) <= (1/j) f(1)c(1) max_l l/c(l).
bool lambda_star_hypothesis_holds(const CostFunction& c, const DistributionRule& f);
/// (1/(f(1)c(1))) min_l c(l)/l. Throws PreconditionError when the hypothesis fails.
double lambda_star_candidate(const CostFunction& c, const DistributionRule& f);

/// A literal evaluation of a printed closed-form expression. These are
/// reported next to the LP values and never replace them; the value may be
/// nonpositive, in which case no price of anarchy is implied.
struct ClosedFormEvaluation {
  PoaMethod method = PoaMethod::ExplicitMin;
  double c_star = 0.0;
  double lambda = 0.0;
  int argmin_j = 0;
  int argmin_l = 0;

  std::optional<double> poa() const {
    if (c_star > 0.0) return 1.0 / c_star;
    return std::nullopt;
  }
};

/// Minimum of the (j, l) constraint grid divided through by c(j), evaluated
/// at lambda = lambda*, j != 0.
ClosedFormEvaluation closed_form_explicit_min(const CostFunction& c, const DistributionRule& f, int n);

/// Conditions for the convex-cost program: f(j)c(j) nondecreasing, c convex
/// nondecreasing, f <= f_MC pointwise and f(1)c(1) = 1. Empty when all hold,
/// otherwise the first failing condition.
std::optional<std::string> convex_program_violation(const CostFunction& c, const DistributionRule& f, int n);

/// max mu over lambda in [0, 1] subject to
/// mu c(j) <= c(l) + lambda [min{j, n-l} f(j)c(j) - min{l, n-j} f(j+1)c(j+1)]
/// for 0 <= l <= j, 1 <= j <= n.
PoaResult closed_form_convex(const CostFunction& c, const DistributionRule& f, int n,
                             const lp::SolverOptions& options = {});

/// Printed Shapley-value expression over l <= j in [n]; requires a
/// normalized convex nondecreasing c.
ClosedFormEvaluation closed_form_sv(const CostFunction& c, int n);
/// Printed marginal-contribution expression over j in [n].
ClosedFormEvaluation closed_form_mc(const CostFunction& c, int n);

// --- cross validation ----------------------------------------------------------

struct MethodOutcome {
  PoaMethod method = PoaMethod::Dual;
  /// "ok", "skipped", "failed" or "flagged".
  std::string status;
  std::optional<double> c_star;
  std::optional<double> delta;  // c_star minus the dual reference
  std::string note;
  std::map<std::string, double> certificate;
};

struct ValidationReport {
  int n = 0;
  std::optional<double> reference_c_star;
  std::vector<MethodOutcome> methods;
  bool lp_methods_agree = false;
  std::vector<std::string> flags;
  /// "consistent", "closed-form discrepancy" or "lp disagreement".
  std::string verdict;

  const MethodOutcome* find(PoaMethod method) const;
};

struct CrossValidationOptions {
  double agreement_tol = 1e-6;
  int primal_max_n = 30;
  int full_index_max_n = 12;
  lp::SolverOptions solver;
};

ValidationReport cross_validate(const CostFunction& c, const DistributionRule& f, int n,
                                const CrossValidationOptions& options = {});

}  // namespace poa
