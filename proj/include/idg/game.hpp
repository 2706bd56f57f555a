#pragma once

#include <array>
#include <string>
#include <vector>

#include "idg/instance.hpp"
#include "idg/types.hpp"

namespace idg {

struct StepPayoff {
  int leader = 0;
  int follower = 0;

  friend bool operator==(const StepPayoff&, const StepPayoff&) = default;
};

// Derived from the successor's class; never stored.
ActionClass classify_action(const IdgInstance& instance, StateId s, ActionId a);

// The operation protocol: an obeyed proposal moves, a disobeyed one leaves
// the state unchanged.
StateId apply_protocol(const IdgInstance& instance, StateId s, ActionId a,
                       FollowerAction decision);

// Leaf payoffs of the one-step game, (leader, follower).
constexpr StepPayoff step_payoff(ActionClass c, FollowerAction decision) {
  if (decision == FollowerAction::Disobey) {
    return c == ActionClass::Harmful ? StepPayoff{0, 1} : StepPayoff{0, -1};
  }
  switch (c) {
    case ActionClass::GoalReaching:
      return {1, 0};
    case ActionClass::Harmful:
      return {-1, -1};
    case ActionClass::Other:
      break;
  }
  return {0, 0};
}

bool is_terminal(const IdgInstance& instance, StateId s);

struct TreeLeaf {
  FollowerAction decision;
  StepPayoff payoff;
};

struct TreeBranch {
  ActionId action;
  std::string label;
  ActionClass action_class;
  // True when the leader cannot tell this branch apart from the other
  // non-goal branches.
  bool in_information_set = false;
  std::array<TreeLeaf, 2> leaves;  // {obey, disobey}
};

// Extensive form of the one-step game rooted at a single state.
struct GameTree {
  StateId root;
  std::vector<TreeBranch> branches;
  std::vector<ActionId> information_set;
};

GameTree build_1idg_tree(const IdgInstance& instance, StateId s);

}  // namespace idg
