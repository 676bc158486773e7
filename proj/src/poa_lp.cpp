#include "poa/poa_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace poa {

std::string to_string(const IndexTriple& t) { return fmt::format("({},{},{})", t.a, t.x, t.b); }

std::vector<IndexTriple> index_set(int n) {
  if (n < 1) throw std::invalid_argument("player count must be >= 1");
  std::vector<IndexTriple> out;
  out.reserve(index_set_size(n));
  for (int a = 0; a <= n; ++a)
    for (int x = 0; a + x <= n; ++x)
      for (int b = 0; a + x + b <= n; ++b)
        if (a + x + b >= 1) out.push_back({a, x, b});
  return out;
}

bool on_boundary(const IndexTriple& t, int n) { return t.a * t.x * t.b == 0 || t.total() == n; }

std::vector<IndexTriple> boundary_index_set(int n) {
  auto all = index_set(n);
  std::erase_if(all, [n](const IndexTriple& t) { return !on_boundary(t, n); });
  return all;
}

std::size_t index_set_size(int n) {
  const auto m = static_cast<std::size_t>(n);
  return (m + 1) * (m + 2) * (m + 3) / 6 - 1;
}

std::string to_string(PoaMethod method) {
  switch (method) {
    case PoaMethod::Primal: return "primal";
    case PoaMethod::Dual: return "dual";
    case PoaMethod::DualFullIndex: return "dual-full-index";
    case PoaMethod::ReducedDual: return "reduced";
    case PoaMethod::ExplicitMin: return "explicit-min";
    case PoaMethod::ConvexProgram: return "convex-program";
    case PoaMethod::PrintedShapley: return "printed-closed-form-sv";
    case PoaMethod::PrintedMarginal: return "printed-closed-form-mc";
  }
  return "unknown";
}

double deviation_coefficient(const IndexTriple& t, const DistributionRule& f, const CostFunction& c) {
  return weighted_share(t.a, f, c, t.ne_load()) - weighted_share(t.b, f, c, t.ne_load() + 1);
}

namespace {

constexpr double kStructuralTol = 1e-12;

struct Instance {
  CostFunction c;
  DistributionRule f;
  int n;
};

// The programs only see players 1..n; c(n+1) becomes the infinity sentinel.
Instance restrict_to(const CostFunction& c, const DistributionRule& f, int n) {
  if (n < 1) throw std::invalid_argument("player count must be >= 1");
  if (c.n() < n) throw std::invalid_argument(fmt::format("cost function covers {} players, need {}", c.n(), n));
  if (f.n() < n) throw std::invalid_argument(fmt::format("distribution rule covers {} players, need {}", f.n(), n));
  return {c.truncated(n), f.truncated(n), n};
}

double indicator_cost(const CostFunction& c, int load) { return load >= 1 ? c(load) : 0.0; }

PoaResult finish(double c_star, PoaMethod method, const lp::Solution& sol) {
  if (!(c_star > 0.0))
    throw lp::SolveError(lp::Status::NumericalFailure, fmt::format("{} program returned C* = {}", to_string(method), c_star));
  PoaResult r;
  r.c_star = c_star;
  r.poa = 1.0 / c_star;
  r.method = method;
  r.residual = sol.max_violation;
  r.iterations = sol.iterations;
  if (r.poa < 1.0 - 1e-9)
    throw lp::SolveError(lp::Status::NumericalFailure, fmt::format("{} program returned PoA {} < 1", to_string(method), r.poa));
  return r;
}

lp::Solution solve_or_throw(const lp::LinearProgram& program, const lp::SolverOptions& options, PoaMethod method) {
  auto sol = lp::solve(program, options);
  if (!sol.optimal())
    throw lp::SolveError(sol.status, fmt::format("{} program: {} ({})", to_string(method), lp::to_string(sol.status),
                                                 sol.diagnostics));
  return sol;
}

// Row of the (lambda, mu) programs: mu * cj - lambda * e <= cl.
void add_dual_row(lp::LinearProgram& program, std::string name, double cj, double e, double cl) {
  program.add_constraint(std::move(name), {-e, cj}, lp::Relation::LessEqual, cl);
}

lp::LinearProgram dual_over(const Instance& in, std::span<const IndexTriple> triples) {
  lp::LinearProgram program(lp::Sense::Maximize);
  program.add_variable("lambda", 0.0, 0.0, lp::kInfinity);
  program.add_variable("mu", 1.0, -lp::kInfinity, lp::kInfinity);
  for (const auto& t : triples) {
    if (t.total() < 1 || t.total() > in.n || t.a < 0 || t.x < 0 || t.b < 0)
      throw std::invalid_argument("triple " + to_string(t) + " is outside the index set");
    add_dual_row(program, fmt::format("t_{}_{}_{}", t.a, t.x, t.b), indicator_cost(in.c, t.ne_load()),
                 deviation_coefficient(t, in.f, in.c), indicator_cost(in.c, t.opt_load()));
  }
  return program;
}

PoaResult solve_two_variable(const lp::LinearProgram& program, const lp::SolverOptions& options, PoaMethod method) {
  const auto sol = solve_or_throw(program, options, method);
  auto r = finish(sol.values[1], method, sol);
  r.lambda_star = sol.values[0];
  r.mu_star = sol.values[1];
  return r;
}

bool matches_rule(const DistributionRule& f, const DistributionRule& g) {
  for (int j = 1; j <= f.n(); ++j) {
    if (std::abs(f(j) - g(j)) > 1e-12 * std::max(1.0, std::abs(g(j)))) return false;
  }
  return true;
}

}  // namespace

lp::LinearProgram build_primal(const CostFunction& c, const DistributionRule& f, int n) {
  const auto in = restrict_to(c, f, n);
  const auto triples = index_set(n);
  lp::LinearProgram program(lp::Sense::Minimize);
  std::vector<double> equilibrium_row, normalization_row;
  equilibrium_row.reserve(triples.size());
  normalization_row.reserve(triples.size());
  for (const auto& t : triples) {
    program.add_variable(fmt::format("theta_{}_{}_{}", t.a, t.x, t.b), indicator_cost(in.c, t.opt_load()));
    equilibrium_row.push_back(deviation_coefficient(t, in.f, in.c));
    normalization_row.push_back(indicator_cost(in.c, t.ne_load()));
  }
  program.add_constraint("equilibrium", std::move(equilibrium_row), lp::Relation::LessEqual, 0.0);
  program.add_constraint("normalization", std::move(normalization_row), lp::Relation::Equal, 1.0);
  return program;
}

PoaResult compute_poa_primal(const CostFunction& c, const DistributionRule& f, int n, const lp::SolverOptions& options) {
  const auto program = build_primal(c, f, n);
  const auto sol = solve_or_throw(program, options, PoaMethod::Primal);
  auto r = finish(sol.objective, PoaMethod::Primal, sol);
  const auto triples = index_set(n);
  ThetaParam theta;
  for (std::size_t k = 0; k < triples.size(); ++k) {
    if (sol.values[k] > 0.0) theta.emplace(triples[k], sol.values[k]);
  }
  r.theta = std::move(theta);
  return r;
}

lp::LinearProgram build_dual(const CostFunction& c, const DistributionRule& f, int n, IndexScope scope) {
  const auto triples = scope == IndexScope::Boundary ? boundary_index_set(n) : index_set(n);
  return build_dual(c, f, n, triples);
}

lp::LinearProgram build_dual(const CostFunction& c, const DistributionRule& f, int n,
                             std::span<const IndexTriple> triples) {
  return dual_over(restrict_to(c, f, n), triples);
}

PoaResult compute_poa_dual(const CostFunction& c, const DistributionRule& f, int n, IndexScope scope,
                           const lp::SolverOptions& options) {
  return solve_two_variable(build_dual(c, f, n, scope), options,
                            scope == IndexScope::Boundary ? PoaMethod::Dual : PoaMethod::DualFullIndex);
}

lp::LinearProgram build_reduced_dual_nondecreasing(const CostFunction& c, const DistributionRule& f, int n) {
  const auto in = restrict_to(c, f, n);
  if (!is_fc_nondecreasing(in.f, in.c)) throw PreconditionError("f(j)c(j) is not nondecreasing");
  lp::LinearProgram program(lp::Sense::Maximize);
  program.add_variable("lambda", 0.0, 0.0, lp::kInfinity);
  program.add_variable("mu", 1.0, -lp::kInfinity, lp::kInfinity);
  for (int j = 0; j <= n; ++j) {
    for (int l = 0; l <= n; ++l) {
      if (j + l < 1) continue;
      // The binding overlap is x = 0 below the diagonal j+l = n and
      // x = j+l-n above it.
      const IndexTriple t = j + l <= n ? IndexTriple{j, 0, l} : IndexTriple{n - l, j + l - n, n - j};
      add_dual_row(program, fmt::format("j{}_l{}", j, l), indicator_cost(in.c, j), deviation_coefficient(t, in.f, in.c),
                   indicator_cost(in.c, l));
    }
  }
  return program;
}

PoaResult compute_poa_reduced(const CostFunction& c, const DistributionRule& f, int n, const lp::SolverOptions& options) {
  return solve_two_variable(build_reduced_dual_nondecreasing(c, f, n), options, PoaMethod::ReducedDual);
}

bool lambda_star_hypothesis_holds(const CostFunction& c, const DistributionRule& f) {
  const int n = std::min(c.n(), f.n());
  double best = 0.0;
  for (int l = 1; l <= n; ++l) best = std::max(best, l / c(l));
  const double scale = f(1) * c(1) * best;
  for (int j = 1; j <= n; ++j) {
    const double bound = scale / j;
    if (f(j) > bound + kStructuralTol * std::max(1.0, bound)) return false;
  }
  return f(1) > 0.0;
}

double lambda_star_candidate(const CostFunction& c, const DistributionRule& f) {
  if (!lambda_star_hypothesis_holds(c, f))
    throw PreconditionError("f(j) <= f(1)c(1) max_l l/c(l) / j does not hold for every j");
  const int n = std::min(c.n(), f.n());
  double best = std::numeric_limits<double>::infinity();
  for (int l = 1; l <= n; ++l) best = std::min(best, c(l) / l);
  return best / (f(1) * c(1));
}

ClosedFormEvaluation closed_form_explicit_min(const CostFunction& c, const DistributionRule& f, int n) {
  const auto in = restrict_to(c, f, n);
  ClosedFormEvaluation out;
  out.method = PoaMethod::ExplicitMin;
  out.lambda = lambda_star_candidate(in.c, in.f);
  out.c_star = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= n; ++j) {
    const double cj = in.c(j);
    for (int l = 0; l <= n; ++l) {
      double bracket = 0.0;
      if (j + l <= n) {
        bracket = weighted_share(j, in.f, in.c, j) - weighted_share(l, in.f, in.c, j + 1);
      } else {
        bracket = weighted_share(n - l, in.f, in.c, j) - weighted_share(n - j, in.f, in.c, j + 1);
      }
      const double value = in.c(l) / cj + out.lambda * bracket / cj;
      if (value < out.c_star) {
        out.c_star = value;
        out.argmin_j = j;
        out.argmin_l = l;
      }
    }
  }
  return out;
}

std::optional<std::string> convex_program_violation(const CostFunction& c, const DistributionRule& f, int n) {
  const auto in = restrict_to(c, f, n);
  if (!is_fc_nondecreasing(in.f, in.c)) return "f(j)c(j) is not nondecreasing";
  if (!is_convex_nondecreasing(in.c)) return "c is not convex nondecreasing";
  for (int j = 1; j <= n; ++j) {
    const double mc = 1.0 - in.c(j - 1) / in.c(j);
    if (in.f(j) > mc + kStructuralTol * std::max(1.0, mc)) return fmt::format("f({}) exceeds f_MC({})", j, j);
  }
  if (std::abs(in.f(1) * in.c(1) - 1.0) > 1e-9) return "f(1)c(1) != 1";
  return std::nullopt;
}

PoaResult closed_form_convex(const CostFunction& c, const DistributionRule& f, int n, const lp::SolverOptions& options) {
  if (auto why = convex_program_violation(c, f, n)) throw PreconditionError(*why);
  const auto in = restrict_to(c, f, n);
  lp::LinearProgram program(lp::Sense::Maximize);
  program.add_variable("lambda", 0.0, 0.0, 1.0);
  program.add_variable("mu", 1.0, -lp::kInfinity, lp::kInfinity);
  for (int j = 1; j <= n; ++j) {
    for (int l = 0; l <= j; ++l) {
      const double e = weighted_share(std::min(j, n - l), in.f, in.c, j) -
                       weighted_share(std::min(l, n - j), in.f, in.c, j + 1);
      add_dual_row(program, fmt::format("j{}_l{}", j, l), in.c(j), e, in.c(l));
    }
  }
  return solve_two_variable(program, options, PoaMethod::ConvexProgram);
}

namespace {

void require_printed_form_domain(const CostFunction& c, int n) {
  if (!is_convex_nondecreasing(c.truncated(n))) throw PreconditionError("c is not convex nondecreasing");
  if (!c.is_normalized()) throw PreconditionError("c(1) != 1");
}

}  // namespace

ClosedFormEvaluation closed_form_sv(const CostFunction& c, int n) {
  if (n < 1 || c.n() < n) throw std::invalid_argument("cost function does not cover n players");
  const auto cn = c.truncated(n);
  require_printed_form_domain(cn, n);
  ClosedFormEvaluation out;
  out.method = PoaMethod::PrintedShapley;
  out.lambda = 1.0;
  out.c_star = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= n; ++j) {
    for (int l = 1; l <= j; ++l) {
      const int tail = std::min(l, n - j);
      // tail = 0 at j = n, before c(n+1) would be read.
      const double last = tail == 0 ? 0.0 : tail * cn.extended(j + 1).value() / ((j + 1) * cn(j));
      const double value = cn(l) / cn(j) + static_cast<double>(std::min(j, n - l)) / j - last;
      if (value < out.c_star) {
        out.c_star = value;
        out.argmin_j = j;
        out.argmin_l = l;
      }
    }
  }
  return out;
}

ClosedFormEvaluation closed_form_mc(const CostFunction& c, int n) {
  if (n < 1 || c.n() < n) throw std::invalid_argument("cost function does not cover n players");
  const auto cn = c.truncated(n);
  require_printed_form_domain(cn, n);
  ClosedFormEvaluation out;
  out.method = PoaMethod::PrintedMarginal;
  out.lambda = 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= n; ++j) {
    const int weight = std::min(j, n - j);
    const double term =
        weight == 0 ? 0.0 : weight / cn(j) * (2.0 * cn(j) - cn(j - 1) - cn.extended(j + 1).value());
    if (term < best) {
      best = term;
      out.argmin_j = j;
      out.argmin_l = j;
    }
  }
  out.c_star = 1.0 + best;
  return out;
}

const MethodOutcome* ValidationReport::find(PoaMethod method) const {
  for (const auto& m : methods) {
    if (m.method == method) return &m;
  }
  return nullptr;
}

ValidationReport cross_validate(const CostFunction& c, const DistributionRule& f, int n,
                                const CrossValidationOptions& options) {
  ValidationReport report;
  report.n = n;
  const auto in = restrict_to(c, f, n);
  const double tol = options.agreement_tol;

  auto lp_entry = [&](PoaMethod method, auto&& run) {
    MethodOutcome m;
    m.method = method;
    try {
      const PoaResult r = run();
      m.c_star = r.c_star;
      if (r.lambda_star) m.certificate["lambda"] = *r.lambda_star;
      if (r.mu_star) m.certificate["mu"] = *r.mu_star;
      m.certificate["residual"] = r.residual;
      m.certificate["iterations"] = static_cast<double>(r.iterations);
      m.status = "ok";
    } catch (const PreconditionError& e) {
      m.status = "skipped";
      m.note = e.what();
    } catch (const std::exception& e) {
      m.status = "failed";
      m.note = e.what();
    }
    report.methods.push_back(std::move(m));
  };
  auto closed_entry = [&](PoaMethod method, auto&& run) {
    MethodOutcome m;
    m.method = method;
    try {
      const ClosedFormEvaluation r = run();
      m.c_star = r.c_star;
      m.certificate["lambda"] = r.lambda;
      m.certificate["argmin_j"] = r.argmin_j;
      m.certificate["argmin_l"] = r.argmin_l;
      m.status = "ok";
    } catch (const PreconditionError& e) {
      m.status = "skipped";
      m.note = e.what();
    } catch (const std::exception& e) {
      m.status = "failed";
      m.note = e.what();
    }
    report.methods.push_back(std::move(m));
  };
  auto skip = [&](PoaMethod method, std::string why) {
    report.methods.push_back({method, "skipped", std::nullopt, std::nullopt, std::move(why), {}});
  };

  lp_entry(PoaMethod::Dual, [&] { return compute_poa_dual(in.c, in.f, n, IndexScope::Boundary, options.solver); });
  if (n <= options.primal_max_n) lp_entry(PoaMethod::Primal, [&] { return compute_poa_primal(in.c, in.f, n, options.solver); });
  else skip(PoaMethod::Primal, fmt::format("n > {}", options.primal_max_n));
  if (n <= options.full_index_max_n)
    lp_entry(PoaMethod::DualFullIndex, [&] { return compute_poa_dual(in.c, in.f, n, IndexScope::Full, options.solver); });
  else skip(PoaMethod::DualFullIndex, fmt::format("n > {}", options.full_index_max_n));
  lp_entry(PoaMethod::ReducedDual, [&] { return compute_poa_reduced(in.c, in.f, n, options.solver); });
  lp_entry(PoaMethod::ConvexProgram, [&] { return closed_form_convex(in.c, in.f, n, options.solver); });
  closed_entry(PoaMethod::ExplicitMin, [&] { return closed_form_explicit_min(in.c, in.f, n); });

  const bool shapley = matches_rule(in.f, shapley_rule(n));
  bool marginal = false;
  try {
    marginal = matches_rule(in.f, marginal_contribution_rule(in.c));
  } catch (const std::invalid_argument&) {
  }
  if (shapley) closed_entry(PoaMethod::PrintedShapley, [&] { return closed_form_sv(in.c, n); });
  else skip(PoaMethod::PrintedShapley, "rule is not the Shapley value");
  if (marginal) closed_entry(PoaMethod::PrintedMarginal, [&] { return closed_form_mc(in.c, n); });
  else skip(PoaMethod::PrintedMarginal, "rule is not marginal contribution");

  const auto& reference = report.methods.front();
  if (reference.status != "ok") {
    report.lp_methods_agree = false;
    report.verdict = "lp disagreement";
    report.flags.push_back("dual program failed: " + reference.note);
    return report;
  }
  report.reference_c_star = reference.c_star;

  report.lp_methods_agree = true;
  bool closed_forms_agree = true;
  for (auto& m : report.methods) {
    if (!m.c_star) {
      if (m.status == "failed" && (m.method == PoaMethod::Primal || m.method == PoaMethod::DualFullIndex ||
                                   m.method == PoaMethod::ReducedDual))
        report.lp_methods_agree = false;
      continue;
    }
    m.delta = *m.c_star - *report.reference_c_star;
    if (std::abs(*m.delta) <= tol) continue;
    const bool is_lp = m.method == PoaMethod::Primal || m.method == PoaMethod::DualFullIndex ||
                       m.method == PoaMethod::ReducedDual;
    if (is_lp) {
      report.lp_methods_agree = false;
      m.status = "failed";
    } else {
      closed_forms_agree = false;
      m.status = "flagged";
    }
    report.flags.push_back(fmt::format("{} gives C* = {:.9g}, dual program gives {:.9g}", to_string(m.method),
                                       *m.c_star, *report.reference_c_star));
  }
  report.verdict = !report.lp_methods_agree ? "lp disagreement"
                   : closed_forms_agree     ? "consistent"
                                            : "closed-form discrepancy";
  return report;
}

}  // namespace poa
