// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "poa/game.hpp"
#include "poa/json_io.hpp"
#include "poa/poa_lp.hpp"
#include "poa/rule_design.hpp"
#include "poa/worst_case.hpp"

using namespace poa;

namespace {

struct Outcome {
  bool passed = true;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      notes.push_back(what);
    }
  }
};

double dual_poa(const CostFunction& c, const DistributionRule& f, int n) { return compute_poa_dual(c, f, n).poa; }

// 1. Curve points at n = 20.
Outcome curves() {
  Outcome o;
  const std::vector<double> ds{1, 1.2, 1.5, 1.8, 2};
  const std::vector<double> sv{1, 1.160712, 1.501366, 2.013490, 2.5};
  const std::vector<double> mc{1, 1.297404, 1.828421, 2.482190, 3.000};
  const std::vector<double> opt{1, 1.127281, 1.374948, 1.715207, 2.012072};
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const auto c = make_polynomial_cost(ds[k], 20);
    const double got_sv = dual_poa(c, shapley_rule(20), 20);
    const double got_mc = dual_poa(c, marginal_contribution_rule(c), 20);
    const auto design = design_optimal_rule(c, 20);
    const double got_opt = dual_poa(c, design.rule, 20);
    o.expect(std::abs(got_sv - sv[k]) <= 2e-3, fmt::format("sv d={} got {:.6f} want {}", ds[k], got_sv, sv[k]));
    o.expect(std::abs(got_mc - mc[k]) <= 2e-3, fmt::format("mc d={} got {:.6f} want {}", ds[k], got_mc, mc[k]));
    o.expect(std::abs(got_opt - opt[k]) <= 2e-3, fmt::format("f* d={} got {:.6f} want {}", ds[k], got_opt, opt[k]));
    o.expect(std::abs(design.poa - opt[k]) <= 2e-3, fmt::format("design lp d={} got {:.6f}", ds[k], design.poa));
  }
  return o;
}

// 2. Ratio table.
Outcome ratios() {
  Outcome o;
  const std::vector<double> ds{1, 1.2, 1.4, 1.5, 1.6, 1.8, 2};
  const std::vector<double> sv{1, 1.03, 1.069, 1.092, 1.117, 1.174, 1.242};
  const std::vector<double> mc{1, 1.151, 1.277, 1.33, 1.376, 1.447, 1.491};
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const auto c = make_polynomial_cost(ds[k], 20);
    const double best = dual_poa(c, design_optimal_rule(c, 20).rule, 20);
    const double r_sv = dual_poa(c, shapley_rule(20), 20) / best;
    const double r_mc = dual_poa(c, marginal_contribution_rule(c), 20) / best;
    o.expect(std::abs(r_sv - sv[k]) <= 5e-3, fmt::format("sv ratio d={} got {:.4f} want {}", ds[k], r_sv, sv[k]));
    o.expect(std::abs(r_mc - mc[k]) <= 5e-3, fmt::format("mc ratio d={} got {:.4f} want {}", ds[k], r_mc, mc[k]));
  }
  return o;
}

// 3. Designed rule at d = 1.2.
Outcome rule_table() {
  Outcome o;
  const std::vector<double> table{1, 0.484, 0.318, 0.236, 0.189, 0.157, 0.134};
  const auto c = make_polynomial_cost(1.2, 20);
  const auto design = design_optimal_rule(c, 20);
  const bool mu_ok = std::abs(design.poa - 1.127281) <= 2e-3;
  o.expect(mu_ok, fmt::format("design poa {:.6f}", design.poa));
  std::vector<std::string> off;
  for (int j = 1; j <= 7; ++j) {
    if (std::abs(design.rule(j) - table[j - 1]) > 5e-3)
      off.push_back(fmt::format("f*({}) = {:.4f} vs {}", j, design.rule(j), table[j - 1]));
  }
  if (!off.empty() && mu_ok) {
    // Only mu* is unique; a different optimal rule is a finding, not a failure.
    for (auto& s : off) o.notes.push_back("non-uniqueness: " + s);
  } else {
    for (auto& s : off) o.expect(false, s);
  }
  return o;
}

// 4 and 5. Strong duality and boundary-set equivalence on the small grid.
Outcome small_grid(bool full_index) {
  Outcome o;
  double worst = 0.0;
  for (int n = 1; n <= 8; ++n) {
    for (double d : {1.0, 1.3, 1.7, 2.0}) {
      const auto c = make_polynomial_cost(d, n);
      for (const auto& [name, f] : std::vector<std::pair<std::string, DistributionRule>>{
               {"sv", shapley_rule(n)}, {"mc", marginal_contribution_rule(c)}}) {
        const double dual = compute_poa_dual(c, f, n).c_star;
        const double other = full_index ? compute_poa_dual(c, f, n, IndexScope::Full).c_star
                                        : compute_poa_primal(c, f, n).c_star;
        const double gap = std::abs(dual - other);
        worst = std::max(worst, gap);
        o.expect(gap <= (full_index ? 1e-8 : 1e-6), fmt::format("n={} d={} {} gap {:.3g}", n, d, name, gap));
      }
    }
  }
  o.notes.push_back(fmt::format("max gap {:.3g}", worst));
  return o;
}

// 6. Worst-case certificates.
Outcome certificates() {
  Outcome o;
  for (int n : {2, 3, 4}) {
    for (double d : {1.2, 2.0}) {
      const auto c = make_polynomial_cost(d, n);
      const std::vector<std::pair<std::string, DistributionRule>> rules{
          {"sv", shapley_rule(n)}, {"mc", marginal_contribution_rule(c)}, {"designed", design_optimal_rule(c, n).rule}};
      for (const auto& [name, f] : rules) {
        const auto tag = fmt::format("n={} d={} {}", n, d, name);
        const auto primal = compute_poa_primal(c, f, n);
        const auto cert = construct_worst_case_game(*primal.theta, c, f, n);
        const auto report = verify_certificate(cert, 1e-8);
        for (const auto& failure : report.failures()) o.expect(false, tag + " check " + failure);
        o.expect(report.max_potential_gap <= 1e-8, fmt::format("{} potential gap {:.3g}", tag, report.max_potential_gap));
        const double dual = dual_poa(c, f, n);
        o.expect(std::abs(report.ratio - dual) <= 1e-6, fmt::format("{} ratio {:.9f} vs dual {:.9f}", tag, report.ratio, dual));
      }
    }
  }
  return o;
}

struct RandomGames {
  std::mt19937 rng;

  GameInstance make(int n, const CostFunction& c, const DistributionRule& f) {
    std::uniform_int_distribution<int> resources_dist(1, 4), actions_dist(1, 4);
    // (0, 1]: draw from [0, 1) and reflect.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const int m = resources_dist(rng);
    std::vector<Resource> resources;
    for (int r = 0; r < m; ++r) resources.push_back({"r" + std::to_string(r), 1.0 - unit(rng)});
    std::vector<std::vector<Action>> sets(n);
    for (auto& set : sets) {
      const int k = actions_dist(rng);
      for (int t = 0; t < k; ++t) {
        Action a;
        for (int r = 0; r < m; ++r)
          if (coin(rng)) a.push_back(r);
        if (a.empty()) a.push_back(std::uniform_int_distribution<int>(0, m - 1)(rng));
        if (std::find(set.begin(), set.end(), a) == set.end()) set.push_back(a);
      }
    }
    return GameInstance(resources, sets, c, f);
  }
};

// 7. Brute-force ratio never beats the dual bound.
Outcome brute_force() {
  Outcome o;
  RandomGames gen{std::mt19937(20240601)};
  std::uniform_real_distribution<double> d_dist(1.0, 2.0);
  double tightest = -1.0;
  int games = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 2;
    const auto c = make_polynomial_cost(d_dist(gen.rng), n);
    const std::vector<std::pair<std::string, DistributionRule>> rules{
        {"sv", shapley_rule(n)}, {"mc", marginal_contribution_rule(c)}, {"designed", design_optimal_rule(c, n).rule}};
    for (const auto& [name, f] : rules) {
      const auto game = gen.make(n, c, f);
      const auto e = empirical_poa(game);
      const double bound = dual_poa(c, f, n);
      ++games;
      tightest = std::max(tightest, e.ratio - bound);
      o.expect(e.ratio <= bound + 1e-6, fmt::format("trial {} {} ratio {:.9f} > bound {:.9f}", trial, name, e.ratio, bound));
    }
  }
  o.notes.push_back(fmt::format("{} games, max(ratio - bound) = {:.3g}", games, tightest));
  return o;
}

// 8. Exact potential identity.
Outcome potential_identity() {
  Outcome o;
  RandomGames gen{std::mt19937(77)};
  std::uniform_real_distribution<double> d_dist(1.0, 2.5);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 4;
    const auto c = make_polynomial_cost(d_dist(gen.rng), n);
    std::vector<double> raw(n);
    for (double& v : raw) v = std::uniform_real_distribution<double>(0.0, 1.5)(gen.rng);
    const std::vector<DistributionRule> rules{shapley_rule(n), marginal_contribution_rule(c),
                                              DistributionRule::from_values(raw)};
    const auto game = gen.make(n, c, rules[trial % 3]);
    Allocation a{std::vector<std::size_t>(n)};
    for (int i = 0; i < n; ++i)
      a.choice[i] = std::uniform_int_distribution<std::size_t>(0, game.actions(i).size() - 1)(gen.rng);
    const auto i = std::uniform_int_distribution<std::size_t>(0, n - 1)(gen.rng);
    const auto k = std::uniform_int_distribution<std::size_t>(0, game.actions(i).size() - 1)(gen.rng);
    const auto b = with_deviation(a, i, k);
    const double gap = std::abs((player_cost(game, i, b) - player_cost(game, i, a)) - (potential(game, b) - potential(game, a)));
    worst = std::max(worst, gap);
    o.expect(gap <= 1e-9, fmt::format("trial {} gap {:.3g}", trial, gap));
  }
  o.notes.push_back(fmt::format("500 triples, max gap {:.3g}", worst));
  return o;
}

// 9. Dominance over the full grid.
Outcome dominance() {
  Outcome o;
  for (int k = 0; k <= 20; ++k) {
    const double d = 1.0 + 0.05 * k;
    const auto c = make_polynomial_cost(d, 20);
    const auto rep = verify_dominance(c, 20, {{"sv", shapley_rule(20)}, {"mc", marginal_contribution_rule(c)}}, 1e-6);
    for (const auto& e : rep.entries)
      o.expect(e.dominated && rep.designed_poa <= e.poa + 1e-6,
               fmt::format("d={:.2f} designed {:.9f} vs {} {:.9f}", d, rep.designed_poa, e.name, e.poa));
  }
  return o;
}

// 10. Printed closed forms against the LP at c = j^2, n = 20.
Outcome discrepancy_report() {
  Outcome o;
  const auto c = make_polynomial_cost(2.0, 20);
  const std::vector<std::tuple<std::string, DistributionRule, PoaMethod>> cases{
      {"sv", shapley_rule(20), PoaMethod::PrintedShapley},
      {"mc", marginal_contribution_rule(c), PoaMethod::PrintedMarginal}};
  for (const auto& [name, f, printed] : cases) {
    CrossValidationOptions options;
    options.full_index_max_n = 20;
    const auto report = cross_validate(c, f, 20, options);
    o.expect(report.lp_methods_agree, name + ": LP methods disagree");
    for (auto m : {PoaMethod::Primal, PoaMethod::DualFullIndex, PoaMethod::ReducedDual}) {
      const auto* entry = report.find(m);
      o.expect(entry && entry->status == "ok" && entry->delta && std::abs(*entry->delta) <= 1e-6,
               name + ": " + to_string(m) + " not within 1e-6 of the dual");
    }
    const auto* p = report.find(printed);
    o.expect(p && p->status == "flagged", name + ": printed closed form not flagged");
    o.expect(report.verdict == "closed-form discrepancy", name + ": verdict " + report.verdict);
    o.notes.push_back(fmt::format("{}: dual C* {:.9f}, printed {:.9f}, verdict '{}'", name, *report.reference_c_star,
                                  p && p->c_star ? *p->c_star : NAN, report.verdict));
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 curve points (n=20, tol 2e-3)", curves},
      {"2 ratio table (tol 5e-3)", ratios},
      {"3 designed rule table at d=1.2 (tol 5e-3)", rule_table},
      {"4 strong duality, n<=8 (tol 1e-6)", [] { return small_grid(false); }},
      {"5 boundary vs full index set (tol 1e-8)", [] { return small_grid(true); }},
      {"6 worst-case certificates (tol 1e-6)", certificates},
      {"7 brute-force games below the bound", brute_force},
      {"8 potential identity (tol 1e-9)", potential_identity},
      {"9 designed rule dominates on d grid", dominance},
      {"10 closed-form discrepancy report", discrepancy_report},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << fmt::format("{} criterion {} ({:.2f}s)\n", o.passed ? "PASS" : "FAIL", name, secs);
    const std::size_t shown = std::min<std::size_t>(o.notes.size(), 12);
    for (std::size_t k = 0; k < shown; ++k) std::cout << "    " << o.notes[k] << '\n';
    if (o.notes.size() > shown) std::cout << fmt::format("    ... {} more\n", o.notes.size() - shown);
    failed += o.passed ? 0 : 1;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
