#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "idg/instance.hpp"
#include "idg/policy.hpp"
#include "idg/types.hpp"

namespace idg {

struct PayoffPair {
  Rational leader{0};
  Rational follower{0};

  friend bool operator==(const PayoffPair&, const PayoffPair&) = default;
};

// ---- safety traps ---------------------------------------------------------

struct TrapCertificate {
  StateId state;
  bool no_goal_action = true;
  // Every Other action out of the state and the member it lands on.
  std::vector<std::pair<ActionId, StateId>> witnesses;
};

// The maximal safety trap of an instance, members in ascending StateId order.
struct TrapSet {
  std::vector<StateId> members;
  std::vector<TrapCertificate> certificates;

  bool contains(StateId s) const;
};

// Greatest fixed point: start from all non-terminal states without a
// goal-reaching action and repeatedly drop states with an Other action
// leaving the set.
TrapSet detect_safety_traps(const IdgInstance& instance);

// ---- reachability ---------------------------------------------------------

struct Reachability {
  bool reachable = false;
  std::optional<std::size_t> distance;  // nullopt means infinite
};

// BFS over obeyed goal-reaching and Other actions only.
Reachability goal_reachable(const IdgInstance& instance, StateId s);
// Safe distance to the nearest goal for every state, nullopt if none.
std::vector<std::optional<std::size_t>> safe_goal_distances(const IdgInstance& instance);

// ---- equilibria -----------------------------------------------------------

enum class EquilibriumCase { GoalAvailable, NoGoalAction };
enum class Player { Leader, Follower };

// Payoff change for the deviating player from one unilateral deviation at a
// decision point. Follower deltas are conditional on the follower's node
// being reached; leader deltas are taken at the leader's node.
struct Deviation {
  Player player;
  std::string at;  // history leading to the decision point
  StateId state;
  std::size_t steps_remaining = 0;
  ActionId action;  // alternative proposal, or the proposal being answered
  std::string description;
  Rational delta;
};

struct EquilibriumReport {
  StateId state;
  Distribution leader;
  FollowerPolicy follower;
  PayoffPair payoff;
  EquilibriumCase tag;
  std::vector<Deviation> deviations;
};

EquilibriumReport solve_1idg(const IdgInstance& instance, StateId s);

struct NIdgSolution {
  StrategyProfile profile;
  std::size_t horizon = 0;
  // values[k][s]: payoff pair with k steps remaining under the informed
  // goal-directed leader and a backward-induction follower best response.
  std::vector<std::vector<PayoffPair>> values;

  const PayoffPair& value(StateId s, std::size_t steps_remaining) const {
    return values.at(steps_remaining).at(s.value);
  }
};

NIdgSolution solve_n_idg(const IdgInstance& instance, std::size_t horizon);

struct VerificationGuard {
  std::size_t max_states = 20;
  std::size_t max_horizon = 8;
};

struct DeviationReport {
  bool certified = false;
  PayoffPair value;  // at the root
  std::size_t decision_points = 0;
  std::vector<Deviation> deviations;
};

// One-shot deviation check at every decision point reached with positive
// probability under the profile, from `root` (default: the start state).
DeviationReport verify_equilibrium(const IdgInstance& instance, const StrategyProfile& profile,
                                   std::size_t horizon, std::optional<StateId> root = std::nullopt,
                                   VerificationGuard guard = {});

std::string_view to_string(EquilibriumCase c);
std::string_view to_string(Player p);

}  // namespace idg
