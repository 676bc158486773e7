#include "poa/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace poa {

GameInstance::GameInstance(std::vector<Resource> resources, std::vector<std::vector<Action>> action_sets,
                           CostFunction cost, DistributionRule rule)
    : resources_(std::move(resources)),
      action_sets_(std::move(action_sets)),
      cost_(std::move(cost)),
      rule_(std::move(rule)) {
  if (action_sets_.empty()) throw std::invalid_argument("game needs at least one player");
  const auto n = static_cast<int>(action_sets_.size());
  if (cost_.n() < n) throw std::invalid_argument("cost function defined for fewer players than the game has");
  if (rule_.n() < n) throw std::invalid_argument("distribution rule defined for fewer players than the game has");

  std::set<std::string> ids;
  for (const auto& r : resources_) {
    if (!ids.insert(r.id).second) throw std::invalid_argument("duplicate resource id '" + r.id + "'");
    if (!(r.value >= 0.0) || !std::isfinite(r.value))
      throw std::invalid_argument("resource '" + r.id + "' needs a finite value >= 0");
  }

  bool has_positive_player = false;
  for (auto& actions : action_sets_) {
    if (actions.empty()) throw std::invalid_argument("every player needs a nonempty action set");
    bool all_positive = true;
    for (auto& action : actions) {
      std::sort(action.begin(), action.end());
      if (std::adjacent_find(action.begin(), action.end()) != action.end())
        throw std::invalid_argument("action lists a resource twice");
      if (!action.empty() && action.back() >= resources_.size())
        throw std::invalid_argument("action references an undeclared resource");
      for (std::size_t r : action) {
        if (!(resources_[r].value > 0.0)) all_positive = false;
      }
    }
    has_positive_player = has_positive_player || all_positive;
  }
  if (!has_positive_player)
    throw std::invalid_argument("no player has an action set touching only positive-value resources");
}

std::size_t GameInstance::resource_index(const std::string& id) const {
  for (std::size_t r = 0; r < resources_.size(); ++r) {
    if (resources_[r].id == id) return r;
  }
  throw std::out_of_range("unknown resource '" + id + "'");
}

void validate_allocation(const GameInstance& game, const Allocation& alloc) {
  if (alloc.choice.size() != game.players()) throw std::invalid_argument("allocation has wrong player count");
  for (std::size_t i = 0; i < alloc.choice.size(); ++i) {
    if (alloc.choice[i] >= game.actions(i).size())
      throw std::invalid_argument("allocation picks an action outside player " + std::to_string(i) + "'s set");
  }
}

const Action& chosen_action(const GameInstance& game, const Allocation& alloc, std::size_t player) {
  return game.actions(player).at(alloc.choice.at(player));
}

std::vector<int> loads(const GameInstance& game, const Allocation& alloc) {
  validate_allocation(game, alloc);
  std::vector<int> load(game.resources().size(), 0);
  for (std::size_t i = 0; i < game.players(); ++i) {
    for (std::size_t r : chosen_action(game, alloc, i)) ++load[r];
  }
  return load;
}

int load_count(const GameInstance& game, const Allocation& alloc, std::size_t resource) {
  if (resource >= game.resources().size()) throw std::out_of_range("unknown resource index");
  return loads(game, alloc)[resource];
}

int load_count(const GameInstance& game, const Allocation& alloc, const std::string& resource_id) {
  return load_count(game, alloc, game.resource_index(resource_id));
}

namespace {

double cost_of_loads(const GameInstance& game, const std::vector<int>& load) {
  double total = 0.0;
  for (std::size_t r = 0; r < load.size(); ++r) {
    if (load[r] > 0) total += game.resources()[r].value * game.cost()(load[r]);
  }
  return total;
}

double player_cost_at(const GameInstance& game, const Action& action, const std::vector<int>& load) {
  double total = 0.0;
  for (std::size_t r : action) {
    const int k = load[r];
    total += game.resources()[r].value * game.cost()(k) * game.rule()(k);
  }
  return total;
}

}  // namespace

double system_cost(const GameInstance& game, const Allocation& alloc) {
  return cost_of_loads(game, loads(game, alloc));
}

double system_cost_without(const GameInstance& game, const Allocation& alloc, std::size_t player) {
  auto load = loads(game, alloc);
  for (std::size_t r : chosen_action(game, alloc, player)) --load[r];
  return cost_of_loads(game, load);
}

double player_cost(const GameInstance& game, std::size_t player, const Allocation& alloc) {
  return player_cost_at(game, chosen_action(game, alloc, player), loads(game, alloc));
}

double potential(const GameInstance& game, const Allocation& alloc) {
  const auto load = loads(game, alloc);
  double total = 0.0;
  for (std::size_t r = 0; r < load.size(); ++r) {
    double inner = 0.0;
    for (int j = 1; j <= load[r]; ++j) inner += game.rule()(j) * game.cost()(j);
    total += game.resources()[r].value * inner;
  }
  return total;
}

Allocation with_deviation(Allocation alloc, std::size_t player, std::size_t action) {
  alloc.choice.at(player) = action;
  return alloc;
}

Deviation best_deviation(const GameInstance& game, const Allocation& alloc) {
  const auto load = loads(game, alloc);
  Deviation best;
  for (std::size_t i = 0; i < game.players(); ++i) {
    const Action& current = chosen_action(game, alloc, i);
    const double here = player_cost_at(game, current, load);
    // Loads seen by player i after switching: remove its own contribution once.
    auto others = load;
    for (std::size_t r : current) --others[r];
    for (std::size_t k = 0; k < game.actions(i).size(); ++k) {
      if (k == alloc.choice[i]) continue;
      const Action& alt = game.actions(i)[k];
      auto next = others;
      for (std::size_t r : alt) ++next[r];
      const double gain = here - player_cost_at(game, alt, next);
      if (gain > best.improvement) best = {i, k, gain};
    }
  }
  return best;
}

bool is_nash(const GameInstance& game, const Allocation& alloc, double tol) {
  return best_deviation(game, alloc).improvement <= tol;
}

std::size_t allocation_count(const GameInstance& game) {
  std::size_t count = 1;
  for (const auto& actions : game.action_sets()) {
    if (count > std::numeric_limits<std::size_t>::max() / actions.size())
      return std::numeric_limits<std::size_t>::max();
    count *= actions.size();
  }
  return count;
}

std::vector<Allocation> enumerate_equilibria(const GameInstance& game, double tol, std::size_t cap) {
  std::vector<Allocation> out;
  for_each_allocation(
      game,
      [&](const Allocation& a) {
        if (is_nash(game, a, tol)) out.push_back(a);
      },
      cap);
  return out;
}

EmpiricalPoa empirical_poa(const GameInstance& game, double tol, std::size_t cap) {
  EmpiricalPoa result;
  result.opt_cost = std::numeric_limits<double>::infinity();
  result.worst_ne_cost = -1.0;
  for_each_allocation(
      game,
      [&](const Allocation& a) {
        const double cost = system_cost(game, a);
        if (cost < result.opt_cost) {
          result.opt_cost = cost;
          result.opt = a;
        }
        if (is_nash(game, a, tol)) {
          ++result.equilibria;
          if (cost > result.worst_ne_cost) {
            result.worst_ne_cost = cost;
            result.worst_ne = a;
          }
        }
      },
      cap);
  if (result.equilibria == 0)
    throw std::runtime_error("no pure Nash equilibrium found; potential games always have one, check tol");
  if (!(result.opt_cost > 0.0)) throw std::runtime_error("optimal system cost is not positive");
  result.ratio = result.worst_ne_cost / result.opt_cost;
  return result;
}

}  // namespace poa
