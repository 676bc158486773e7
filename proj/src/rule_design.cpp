#include "poa/rule_design.hpp"

#include <fmt/format.h>

#include "poa/poa_lp.hpp"

namespace poa {

lp::LinearProgram build_design_lp(const CostFunction& c, int n) {
  if (n < 1) throw std::invalid_argument("player count must be >= 1");
  if (c.n() < n) throw std::invalid_argument("cost function does not cover n players");
  const auto cn = c.truncated(n);
  lp::LinearProgram program(lp::Sense::Maximize);
  for (int j = 1; j <= n; ++j) program.add_variable(fmt::format("f{}", j), 0.0);
  const auto mu = program.add_variable("mu", 1.0, -lp::kInfinity, lp::kInfinity);

  auto rule_column = [n](int load) { return static_cast<std::size_t>(std::min(load, n) - 1); };
  for (const auto& t : boundary_index_set(n)) {
    // mu * c(a+x) - a c(a+x) f~(a+x) + b c(a+x+1) f~(a+x+1) <= c(b+x)
    std::vector<double> row(program.num_variables(), 0.0);
    const int j = t.ne_load();
    if (j >= 1) row[mu] = cn(j);
    if (t.a > 0) row[rule_column(j)] -= t.a * cn(j);
    if (t.b > 0) row[rule_column(j + 1)] += t.b * cn.extended(j + 1).value();
    program.add_constraint(fmt::format("t_{}_{}_{}", t.a, t.x, t.b), std::move(row), lp::Relation::LessEqual,
                           t.opt_load() >= 1 ? cn(t.opt_load()) : 0.0);
  }
  return program;
}

DesignResult design_optimal_rule(const CostFunction& c, int n, const lp::SolverOptions& options) {
  const auto program = build_design_lp(c, n);
  const auto sol = lp::solve(program, options);
  if (!sol.optimal())
    throw lp::SolveError(sol.status, "design program: " + lp::to_string(sol.status) + " (" + sol.diagnostics + ")");
  const double mu = sol.values[static_cast<std::size_t>(n)];
  if (!(mu > 0.0)) throw lp::SolveError(lp::Status::NumericalFailure, fmt::format("design program returned mu = {}", mu));

  std::vector<double> raw(sol.values.begin(), sol.values.begin() + n);
  for (double& v : raw) v = std::max(0.0, v);
  // mu <= f~(1) c(1) holds at every feasible point, so f~(1) > 0 here.
  std::vector<double> scaled(raw);
  for (double& v : scaled) v /= raw.front();

  return DesignResult{DistributionRule::from_values(std::move(scaled)), std::move(raw), mu, 1.0 / mu,
                      sol.max_violation, sol.iterations};
}

DominanceReport verify_dominance(const CostFunction& c, int n, const std::vector<NamedRule>& rules, double tol,
                                 const lp::SolverOptions& options) {
  DominanceReport report;
  const auto designed = design_optimal_rule(c, n, options);
  report.designed_poa = compute_poa_dual(c, designed.rule, n, IndexScope::Boundary, options).poa;
  for (const auto& named : rules) {
    DominanceEntry entry;
    entry.name = named.name;
    entry.poa = compute_poa_dual(c, named.rule, n, IndexScope::Boundary, options).poa;
    entry.ratio = entry.poa / report.designed_poa;
    entry.dominated = report.designed_poa <= entry.poa + tol;
    report.holds = report.holds && entry.dominated;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace poa
