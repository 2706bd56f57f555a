#include "idg/solver.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "graph_util.hpp"
#include "idg/error.hpp"
#include "idg/game.hpp"

namespace idg {

std::string_view to_string(EquilibriumCase c) {
  return c == EquilibriumCase::GoalAvailable ? "goal-available" : "no-goal-action";
}

std::string_view to_string(Player p) { return p == Player::Leader ? "leader" : "follower"; }

bool TrapSet::contains(StateId s) const {
  return std::binary_search(members.begin(), members.end(), s);
}

TrapSet detect_safety_traps(const IdgInstance& instance) {
  const std::size_t n = instance.state_count();
  std::vector<char> in(n, 0);
  for (std::uint32_t s = 0; s < n; ++s) {
    const StateId id{s};
    if (is_terminal(instance, id)) continue;
    bool goal_action = false;
    for (std::uint32_t a = 0; a < instance.actions(id).size(); ++a) {
      goal_action |= classify_action(instance, id, ActionId{a}) == ActionClass::GoalReaching;
    }
    in[s] = !goal_action;
  }
  // Harmful proposals are vetoed and keep the state in place, so only Other
  // actions can leave the set.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::uint32_t s = 0; s < n; ++s) {
      if (!in[s]) continue;
      const auto acts = instance.actions(StateId{s});
      for (std::uint32_t a = 0; a < acts.size(); ++a) {
        if (classify_action(instance, StateId{s}, ActionId{a}) == ActionClass::Other &&
            !in[acts[a].target.value]) {
          in[s] = 0;
          changed = true;
          break;
        }
      }
    }
  }
  TrapSet out;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (!in[s]) continue;
    const StateId id{s};
    TrapCertificate cert{id, true, {}};
    const auto acts = instance.actions(id);
    for (std::uint32_t a = 0; a < acts.size(); ++a) {
      if (classify_action(instance, id, ActionId{a}) == ActionClass::Other) {
        cert.witnesses.emplace_back(ActionId{a}, acts[a].target);
      }
    }
    out.members.push_back(id);
    out.certificates.push_back(std::move(cert));
  }
  return out;
}

std::vector<std::optional<std::size_t>> safe_goal_distances(const IdgInstance& instance) {
  return detail::distances_to_goal(instance, [&](StateId, ActionId, StateId t) {
    return instance.state_class(t) != StateClass::Harmful;
  });
}

Reachability goal_reachable(const IdgInstance& instance, StateId s) {
  instance.state_class(s);  // validates
  const auto d = safe_goal_distances(instance)[s.value];
  return Reachability{d.has_value(), d};
}

namespace {

FollowerAction flip(FollowerAction d) {
  return d == FollowerAction::Obey ? FollowerAction::Disobey : FollowerAction::Obey;
}

PayoffPair operator+(const PayoffPair& a, const PayoffPair& b) {
  return {a.leader + b.leader, a.follower + b.follower};
}

PayoffPair scaled(const PayoffPair& a, const Rational& p) {
  return {a.leader * p, a.follower * p};
}

PayoffPair to_pair(StepPayoff p) { return {Rational(p.leader), Rational(p.follower)}; }

// Exhaustive evaluation of a profile over a finite horizon. Payoffs are
// summed undiscounted across steps.
class ProfileEvaluator {
 public:
  ProfileEvaluator(const IdgInstance& instance, const StrategyProfile& profile)
      : instance_(instance), profile_(profile) {}

  PayoffPair value(const LeaderBeliefState& belief, std::size_t k) {
    const StateId s = belief.observation.state;
    if (k == 0 || is_terminal(instance_, s)) return {};
    const Key key = make_key(belief, k);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    PayoffPair total;
    for (const auto& p : profile_.leader->propose(belief)) {
      total = total + scaled(outcome(belief, k, p.action, profile_.follower.decide(s, p.action)),
                             p.probability);
    }
    memo_.emplace(key, total);
    return total;
  }

  // Payoff of answering proposal `a` with `decision`, continuing on-profile.
  PayoffPair outcome(const LeaderBeliefState& belief, std::size_t k, ActionId a,
                     FollowerAction decision) {
    const StateId s = belief.observation.state;
    const PayoffPair step = to_pair(step_payoff(classify_action(instance_, s, a), decision));
    const StateId next = apply_protocol(instance_, s, a, decision);
    if (k <= 1 || is_terminal(instance_, next)) return step;
    LeaderBeliefState child = belief;
    advance_belief(instance_, child, a, decision, next);
    return step + value(child, k - 1);
  }

  void check(const LeaderBeliefState& belief, std::size_t k, const std::string& history,
             DeviationReport& report) {
    const StateId s = belief.observation.state;
    if (k == 0 || is_terminal(instance_, s)) return;
    if (!visited_.insert(make_key(belief, k)).second) return;
    ++report.decision_points;

    const PayoffPair here = value(belief, k);
    const Distribution dist = profile_.leader->propose(belief);
    const auto acts = instance_.actions(s);
    for (std::uint32_t i = 0; i < acts.size(); ++i) {
      const ActionId a{i};
      const PayoffPair alt = outcome(belief, k, a, profile_.follower.decide(s, a));
      report.deviations.push_back(Deviation{Player::Leader, history, s, k, a,
                                            "propose " + acts[i].label, alt.leader - here.leader});
    }
    for (const auto& p : dist) {
      const FollowerAction d = profile_.follower.decide(s, p.action);
      const PayoffPair on = outcome(belief, k, p.action, d);
      const PayoffPair off = outcome(belief, k, p.action, flip(d));
      report.deviations.push_back(
          Deviation{Player::Follower, history, s, k, p.action,
                    std::string(to_string(flip(d))) + " " + acts[p.action.value].label,
                    off.follower - on.follower});
    }
    for (const auto& p : dist) {
      const FollowerAction d = profile_.follower.decide(s, p.action);
      const StateId next = apply_protocol(instance_, s, p.action, d);
      if (k <= 1 || is_terminal(instance_, next)) continue;
      LeaderBeliefState child = belief;
      advance_belief(instance_, child, p.action, d, next);
      check(child, k - 1,
            history + " " + acts[p.action.value].label + ":" + std::string(to_string(d)), report);
    }
  }

 private:
  using Key = std::tuple<StateId, std::size_t, VetoMemory>;

  Key make_key(const LeaderBeliefState& belief, std::size_t k) const {
    if (!profile_.leader->uses_veto_memory()) return {belief.observation.state, k, VetoMemory{}};
    return {belief.observation.state, k, belief.vetoes};
  }

  const IdgInstance& instance_;
  const StrategyProfile& profile_;
  std::map<Key, PayoffPair> memo_;
  std::set<Key> visited_;
};

DeviationReport run_verification(const IdgInstance& instance, const StrategyProfile& profile,
                                 std::size_t horizon, StateId root) {
  ProfileEvaluator eval(instance, profile);
  DeviationReport report;
  const LeaderBeliefState belief = initial_belief(instance, root);
  report.value = eval.value(belief, horizon);
  eval.check(belief, horizon, instance.state_name(root), report);
  report.certified = std::all_of(report.deviations.begin(), report.deviations.end(),
                                 [](const Deviation& d) { return d.delta <= Rational(0); });
  return report;
}

}  // namespace

EquilibriumReport solve_1idg(const IdgInstance& instance, StateId s) {
  if (is_terminal(instance, s)) {
    throw RejectedInput("state '" + instance.state_name(s) + "' is terminal");
  }
  std::vector<ActionId> goal_actions;
  std::vector<ActionId> all;
  for (std::uint32_t a = 0; a < instance.actions(s).size(); ++a) {
    all.push_back(ActionId{a});
    if (classify_action(instance, s, ActionId{a}) == ActionClass::GoalReaching) {
      goal_actions.push_back(ActionId{a});
    }
  }
  EquilibriumReport report{s,
                           uniform_over(goal_actions.empty() ? all : goal_actions),
                           follower_optimal_policy(instance),
                           {},
                           goal_actions.empty() ? EquilibriumCase::NoGoalAction
                                                : EquilibriumCase::GoalAvailable,
                           {}};
  for (const auto& p : report.leader) {
    const auto cls = classify_action(instance, s, p.action);
    report.payoff =
        report.payoff + scaled(to_pair(step_payoff(cls, report.follower.decide(s, p.action))),
                               p.probability);
  }
  const StrategyProfile profile{
      table_leader_policy(instance, {{s, report.leader}}, "one-step"), report.follower};
  report.deviations = run_verification(instance, profile, 1, s).deviations;
  return report;
}

NIdgSolution solve_n_idg(const IdgInstance& instance, std::size_t horizon) {
  if (horizon == 0) throw RejectedInput("horizon must be at least 1");
  const std::size_t n = instance.state_count();
  const auto informed = informed_leader_policy(instance);
  const FollowerPolicy optimal = follower_optimal_policy(instance);

  NIdgSolution out{StrategyProfile{leader_replanning_policy(instance), optimal}, horizon, {}};
  out.values.assign(horizon + 1, std::vector<PayoffPair>(n));
  for (std::size_t k = 1; k <= horizon; ++k) {
    for (std::uint32_t si = 0; si < n; ++si) {
      const StateId s{si};
      if (is_terminal(instance, s)) continue;
      PayoffPair total;
      for (const auto& p : informed->propose(initial_belief(instance, s))) {
        const auto cls = classify_action(instance, s, p.action);
        const StateId next = instance.successor(s, p.action);
        PayoffPair obey = to_pair(step_payoff(cls, FollowerAction::Obey));
        if (!is_terminal(instance, next)) obey = obey + out.values[k - 1][next.value];
        const PayoffPair disobey =
            to_pair(step_payoff(cls, FollowerAction::Disobey)) + out.values[k - 1][si];
        // Follower best response; ties go to the optimal follower's choice.
        const PayoffPair* chosen = optimal.decide(s, p.action) == FollowerAction::Obey ? &obey : &disobey;
        if (obey.follower > disobey.follower) chosen = &obey;
        if (disobey.follower > obey.follower) chosen = &disobey;
        total = total + scaled(*chosen, p.probability);
      }
      out.values[k][si] = total;
    }
  }
  return out;
}

DeviationReport verify_equilibrium(const IdgInstance& instance, const StrategyProfile& profile,
                                   std::size_t horizon, std::optional<StateId> root,
                                   VerificationGuard guard) {
  if (horizon == 0) throw RejectedInput("horizon must be at least 1");
  if (instance.state_count() > guard.max_states) {
    throw GuardExceeded("exhaustive verification guard max_states=" +
                        std::to_string(guard.max_states) + " exceeded by an instance with " +
                        std::to_string(instance.state_count()) + " states");
  }
  if (horizon > guard.max_horizon) {
    throw GuardExceeded("exhaustive verification guard max_horizon=" +
                        std::to_string(guard.max_horizon) + " exceeded by horizon " +
                        std::to_string(horizon));
  }
  if (!profile.leader) throw RejectedInput("strategy profile has no leader policy");
  return run_verification(instance, profile, horizon, root.value_or(instance.start()));
}

}  // namespace idg
