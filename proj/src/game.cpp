#include "idg/game.hpp"

#include "idg/error.hpp"

namespace idg {

ActionClass classify_action(const IdgInstance& instance, StateId s, ActionId a) {
  switch (instance.state_class(instance.successor(s, a))) {
    case StateClass::Goal:
      return ActionClass::GoalReaching;
    case StateClass::Harmful:
      return ActionClass::Harmful;
    case StateClass::Other:
      break;
  }
  return ActionClass::Other;
}

StateId apply_protocol(const IdgInstance& instance, StateId s, ActionId a,
                       FollowerAction decision) {
  const StateId next = instance.successor(s, a);  // validates s and a
  return decision == FollowerAction::Obey ? next : s;
}

bool is_terminal(const IdgInstance& instance, StateId s) {
  return instance.state_class(s) != StateClass::Other;
}

GameTree build_1idg_tree(const IdgInstance& instance, StateId s) {
  if (is_terminal(instance, s)) {
    throw RejectedInput("cannot build a game tree at terminal state '" +
                        instance.state_name(s) + "'");
  }
  GameTree tree;
  tree.root = s;
  const auto acts = instance.actions(s);
  for (std::uint32_t i = 0; i < acts.size(); ++i) {
    const ActionId a{i};
    TreeBranch b;
    b.action = a;
    b.label = acts[i].label;
    b.action_class = classify_action(instance, s, a);
    b.in_information_set = b.action_class != ActionClass::GoalReaching;
    b.leaves = {TreeLeaf{FollowerAction::Obey, step_payoff(b.action_class, FollowerAction::Obey)},
                TreeLeaf{FollowerAction::Disobey,
                         step_payoff(b.action_class, FollowerAction::Disobey)}};
    if (b.in_information_set) tree.information_set.push_back(a);
    tree.branches.push_back(std::move(b));
  }
  return tree;
}

}  // namespace idg
