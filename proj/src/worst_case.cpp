#include "poa/worst_case.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace poa {

namespace {

std::size_t block_resource(std::size_t block, int n, int offset) {
  const int copy = ((offset % n) + n) % n;
  return block * static_cast<std::size_t>(n) + static_cast<std::size_t>(copy);
}

Action circular_interval(std::size_t block, int n, int start, int length) {
  Action out;
  for (int k = 0; k < length; ++k) out.push_back(block_resource(block, n, start + k));
  return out;
}

}  // namespace

WorstCaseCertificate construct_worst_case_game(const ThetaParam& theta, const CostFunction& c,
                                               const DistributionRule& f, int n, double prune) {
  const auto program = build_primal(c, f, n);
  const auto triples = index_set(n);
  std::vector<double> point(triples.size(), 0.0);
  for (const auto& [t, value] : theta) {
    const auto it = std::lower_bound(triples.begin(), triples.end(), t);
    if (it == triples.end() || *it != t) throw std::invalid_argument("theta uses triple " + to_string(t) + " outside I");
    point[static_cast<std::size_t>(it - triples.begin())] = value;
  }
  const double residual = program.max_violation(point);
  if (residual > 1e-8) throw std::invalid_argument(fmt::format("theta is infeasible for the primal (residual {:.3e})", residual));

  const auto cn = c.truncated(n);
  const auto fn = f.truncated(n);

  ThetaParam support;
  double pruned = 0.0;
  double opt_cost = 0.0;
  for (const auto& [t, value] : theta) {
    if (value > prune) {
      support.emplace(t, value);
      if (t.opt_load() >= 1) opt_cost += value * cn(t.opt_load());
    } else {
      pruned += std::max(0.0, value);
    }
  }
  if (!(opt_cost > 0.0)) throw std::invalid_argument("theta puts no value on optimal-allocation resources");

  std::vector<Resource> resources;
  std::vector<Action> ne(static_cast<std::size_t>(n)), opt(static_cast<std::size_t>(n));
  std::size_t block = 0;
  for (const auto& [t, value] : support) {
    for (int i = 0; i < n; ++i)
      resources.push_back({fmt::format("r({},{},{},{})", t.a, t.x, t.b, i), value / n});
    for (int i = 0; i < n; ++i) {
      auto ne_part = circular_interval(block, n, i, t.ne_load());
      auto opt_part = circular_interval(block, n, i - t.b, t.opt_load());
      ne[i].insert(ne[i].end(), ne_part.begin(), ne_part.end());
      opt[i].insert(opt[i].end(), opt_part.begin(), opt_part.end());
    }
    ++block;
  }

  std::vector<std::vector<Action>> action_sets;
  for (int i = 0; i < n; ++i) action_sets.push_back({ne[i], opt[i]});

  WorstCaseCertificate cert{GameInstance(std::move(resources), std::move(action_sets), cn, fn),
                            Allocation{std::vector<std::size_t>(static_cast<std::size_t>(n), 0)},
                            Allocation{std::vector<std::size_t>(static_cast<std::size_t>(n), 1)},
                            0.0,
                            std::move(support),
                            pruned};
  cert.claimed_poa = system_cost(cert.game, cert.ne_alloc) / system_cost(cert.game, cert.opt_alloc);
  return cert;
}

bool CertificateReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CertificateCheck& c) { return c.passed; });
}

std::vector<std::string> CertificateReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.passed) out.push_back(c.name + ": " + c.detail);
  }
  return out;
}

CertificateReport verify_certificate(const WorstCaseCertificate& cert, double tol) {
  CertificateReport report;
  const auto& game = cert.game;
  const int n = static_cast<int>(game.players());
  const auto& f = game.rule();
  const auto& c = game.cost();

  // Structure first; the remaining checks assume the layout.
  const bool shape_ok = game.resources().size() == cert.theta.size() * static_cast<std::size_t>(n) &&
                        cert.ne_alloc.choice.size() == game.players() &&
                        cert.opt_alloc.choice.size() == game.players();
  if (!shape_ok) {
    report.checks.push_back({"layout", false, "resource or allocation counts do not match theta and n"});
    return report;
  }
  try {
    validate_allocation(game, cert.ne_alloc);
    validate_allocation(game, cert.opt_alloc);
  } catch (const std::exception& e) {
    report.checks.push_back({"layout", false, e.what()});
    return report;
  }
  report.checks.push_back({"layout", true, ""});

  {
    const auto dev = best_deviation(game, cert.ne_alloc);
    const bool ok = dev.improvement <= tol;
    if (!ok) report.deviating_player = dev.player;
    report.checks.push_back({"nash", ok,
                             ok ? "" : fmt::format("player {} lowers its cost by {:.3e} with action {}", dev.player,
                                                   dev.improvement, dev.action)});
  }

  {
    double formula = 0.0;
    for (const auto& [t, value] : cert.theta) formula -= value * deviation_coefficient(t, f, c);
    formula /= n;
    report.potential_formula = formula;
    const double phi_ne = potential(game, cert.ne_alloc);
    double worst_gap = 0.0;
    double worst_cost_gap = 0.0;
    for (std::size_t i = 0; i < game.players(); ++i) {
      const auto deviated = with_deviation(cert.ne_alloc, i, cert.opt_alloc.choice[i]);
      const double direct = potential(game, deviated) - phi_ne;
      worst_gap = std::max(worst_gap, std::abs(direct - formula));
      const double cost_diff = player_cost(game, i, deviated) - player_cost(game, i, cert.ne_alloc);
      worst_cost_gap = std::max(worst_cost_gap, std::abs(cost_diff - direct));
    }
    report.max_potential_gap = worst_gap;
    const bool ok = worst_gap <= tol && formula >= -tol && worst_cost_gap <= tol;
    report.checks.push_back(
        {"potential", ok,
         ok ? ""
            : fmt::format("closed expression {:.9g}, max gap to direct difference {:.3e}, max gap to cost "
                          "difference {:.3e}",
                          formula, worst_gap, worst_cost_gap)});
  }

  {
    const double opt_cost = system_cost(game, cert.opt_alloc);
    report.ratio = opt_cost > 0.0 ? system_cost(game, cert.ne_alloc) / opt_cost : 0.0;
    const bool ok = opt_cost > 0.0 && std::abs(report.ratio - cert.claimed_poa) <= tol;
    report.checks.push_back(
        {"ratio", ok, ok ? "" : fmt::format("ratio {:.12g} differs from claimed {:.12g}", report.ratio, cert.claimed_poa)});
  }

  {
    bool ok = true;
    std::string detail;
    std::size_t block = 0;
    for (const auto& [t, value] : cert.theta) {
      const std::size_t lo = block * static_cast<std::size_t>(n), hi = lo + static_cast<std::size_t>(n);
      for (std::size_t i = 0; i < game.players() && ok; ++i) {
        const Action& a_ne = chosen_action(game, cert.ne_alloc, i);
        const Action& a_opt = chosen_action(game, cert.opt_alloc, i);
        auto in_block = [&](std::size_t r) { return r >= lo && r < hi; };
        const auto ne_count = std::count_if(a_ne.begin(), a_ne.end(), in_block);
        const auto opt_count = std::count_if(a_opt.begin(), a_opt.end(), in_block);
        long both = 0;
        for (std::size_t r : a_ne) {
          if (in_block(r) && std::binary_search(a_opt.begin(), a_opt.end(), r)) ++both;
        }
        if (both != t.x || ne_count != t.ne_load() || opt_count != t.opt_load()) {
          ok = false;
          detail = fmt::format("player {} on triple {}: |ne|={} |opt|={} overlap={}", i, to_string(t), ne_count,
                               opt_count, both);
        }
      }
      ++block;
    }
    report.checks.push_back({"overlap", ok, detail});
  }

  {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < game.players(); ++i) {
      const double cost = player_cost(game, i, cert.ne_alloc);
      lo = std::min(lo, cost);
      hi = std::max(hi, cost);
    }
    const bool ok = hi - lo <= tol;
    report.checks.push_back({"symmetry", ok, ok ? "" : fmt::format("equilibrium costs span [{:.9g}, {:.9g}]", lo, hi)});
  }

  double max_c = 0.0;
  for (int j = 1; j <= c.n(); ++j) max_c = std::max(max_c, c(j));
  report.pruning_bound = cert.pruned_mass * max_c;
  return report;
}

}  // namespace poa
