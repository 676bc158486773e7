#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "poa/cost_model.hpp"

namespace poa {

struct Resource {
  std::string id;
  double value = 0.0;
};

/// An action is a set of resource indices, kept sorted and duplicate free.
using Action = std::vector<std::size_t>;

/// Explicit finite cost-sharing game G = (R, {v_r}, N, {A_i}, f).
class GameInstance {
 public:
  /// Validates the instance; throws std::invalid_argument on any violation.
  GameInstance(std::vector<Resource> resources, std::vector<std::vector<Action>> action_sets,
               CostFunction cost, DistributionRule rule);

  std::size_t players() const { return action_sets_.size(); }
  const std::vector<Resource>& resources() const { return resources_; }
  const std::vector<std::vector<Action>>& action_sets() const { return action_sets_; }
  const std::vector<Action>& actions(std::size_t player) const { return action_sets_.at(player); }
  const CostFunction& cost() const { return cost_; }
  const DistributionRule& rule() const { return rule_; }

  /// Index of the resource with the given id; throws std::out_of_range.
  std::size_t resource_index(const std::string& id) const;

 private:
  std::vector<Resource> resources_;
  std::vector<std::vector<Action>> action_sets_;
  CostFunction cost_;
  DistributionRule rule_;
};

/// One action index per player.
struct Allocation {
  std::vector<std::size_t> choice;

  friend bool operator==(const Allocation&, const Allocation&) = default;
  friend auto operator<=>(const Allocation&, const Allocation&) = default;
};

void validate_allocation(const GameInstance& game, const Allocation& alloc);
const Action& chosen_action(const GameInstance& game, const Allocation& alloc, std::size_t player);

/// |a|_r for every resource.
std::vector<int> loads(const GameInstance& game, const Allocation& alloc);
int load_count(const GameInstance& game, const Allocation& alloc, std::size_t resource);
int load_count(const GameInstance& game, const Allocation& alloc, const std::string& resource_id);

/// C(a) = sum_r v_r c(|a|_r).
double system_cost(const GameInstance& game, const Allocation& alloc);
/// C(empty, a_{-i}): system cost with player i removed.
double system_cost_without(const GameInstance& game, const Allocation& alloc, std::size_t player);
/// J_i(a) = sum_{r in a_i} v_r c(|a|_r) f(|a|_r).
double player_cost(const GameInstance& game, std::size_t player, const Allocation& alloc);
/// phi(a) = sum_r sum_{j=1}^{|a|_r} v_r f(j) c(j).
double potential(const GameInstance& game, const Allocation& alloc);

Allocation with_deviation(Allocation alloc, std::size_t player, std::size_t action);

struct Deviation {
  std::size_t player = 0;
  std::size_t action = 0;
  double improvement = 0.0;
};

/// Largest unilateral improvement J_i(a) - J_i(a_i', a_{-i}) over all players
/// and actions; improvement is 0 with player = action = 0 for a strict optimum.
Deviation best_deviation(const GameInstance& game, const Allocation& alloc);

/// True iff no unilateral deviation lowers a player's cost by more than tol.
bool is_nash(const GameInstance& game, const Allocation& alloc, double tol = 1e-9);

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

/// Number of pure allocations, saturating at SIZE_MAX.
std::size_t allocation_count(const GameInstance& game);

/// Calls visit on every allocation in lexicographic order. Throws
/// std::length_error when the count exceeds cap.
template <typename Visitor>
void for_each_allocation(const GameInstance& game, Visitor&& visit,
                         std::size_t cap = kDefaultEnumerationCap);

/// All pure Nash equilibria in lexicographic order.
std::vector<Allocation> enumerate_equilibria(const GameInstance& game, double tol = 1e-9,
                                             std::size_t cap = kDefaultEnumerationCap);

struct EmpiricalPoa {
  double worst_ne_cost = 0.0;
  double opt_cost = 0.0;
  double ratio = 0.0;
  Allocation worst_ne;
  Allocation opt;
  std::size_t equilibria = 0;
};

/// Worst equilibrium cost over optimal cost for this single instance.
EmpiricalPoa empirical_poa(const GameInstance& game, double tol = 1e-9,
                           std::size_t cap = kDefaultEnumerationCap);

// ---------------------------------------------------------------------------

template <typename Visitor>
void for_each_allocation(const GameInstance& game, Visitor&& visit, std::size_t cap) {
  if (allocation_count(game) > cap) throw std::length_error("allocation space exceeds enumeration cap");
  const std::size_t n = game.players();
  Allocation alloc{std::vector<std::size_t>(n, 0)};
  while (true) {
    visit(static_cast<const Allocation&>(alloc));
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++alloc.choice[i] < game.actions(i).size()) break;
      alloc.choice[i] = 0;
      if (i == 0) return;
    }
    if (n == 0) return;
  }
}

}  // namespace poa
