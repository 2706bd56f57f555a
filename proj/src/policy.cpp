#include "idg/policy.hpp"

#include <algorithm>
#include <numeric>

#include "graph_util.hpp"
#include "idg/error.hpp"
#include "idg/game.hpp"

namespace idg {

Distribution uniform_over(const std::vector<ActionId>& support) {
  if (support.empty()) throw RejectedInput("distribution support is empty");
  std::vector<ActionId> sorted = support;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  Distribution d;
  const Rational p(1, static_cast<std::int64_t>(sorted.size()));
  for (ActionId a : sorted) d.push_back(Proposal{a, p});
  return d;
}

Distribution point_mass(ActionId a) { return {Proposal{a, Rational(1)}}; }

ActionId sample(const Distribution& d, Rng& rng) {
  if (d.empty()) throw RejectedInput("cannot sample from an empty distribution");
  std::int64_t common = 1;
  for (const auto& p : d) common = std::lcm(common, p.probability.denominator());
  const auto draw = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(common)));
  std::int64_t acc = 0;
  for (const auto& p : d) {
    acc += p.probability.numerator() * (common / p.probability.denominator());
    if (draw < acc) return p.action;
  }
  return d.back().action;
}

bool VetoMemory::contains(StateId s, ActionId a) const {
  auto it = vetoed_.find(s);
  return it != vetoed_.end() && it->second.contains(a);
}

const std::set<ActionId>& VetoMemory::at(StateId s) const {
  static const std::set<ActionId> kEmpty;
  auto it = vetoed_.find(s);
  return it == vetoed_.end() ? kEmpty : it->second;
}

void LeaderBeliefState::record_veto(ActionId a) {
  vetoes.add(observation.state, a);
  if (vetoes.at(observation.state).size() >= observation.actions.size()) {
    vetoes.clear(observation.state);
  }
}

LeaderBeliefState initial_belief(const IdgInstance& instance, StateId s) {
  return LeaderBeliefState{observe(instance, s), {}};
}

void advance_belief(const IdgInstance& instance, LeaderBeliefState& belief, ActionId a,
                    FollowerAction decision, StateId next) {
  if (decision == FollowerAction::Disobey) {
    belief.record_veto(a);
  } else {
    belief.observation = observe(instance, next);
  }
}

namespace {

std::vector<ActionId> all_actions(const IdgInstance& instance, StateId s) {
  std::vector<ActionId> out;
  for (std::uint32_t i = 0; i < instance.actions(s).size(); ++i) out.push_back(ActionId{i});
  return out;
}

// Actions among `candidates` whose successor is closest to a goal.
std::vector<ActionId> closest(const IdgInstance& instance, StateId s,
                              const std::vector<ActionId>& candidates,
                              const std::vector<std::optional<std::size_t>>& dist) {
  std::vector<ActionId> best;
  std::optional<std::size_t> best_d;
  for (ActionId a : candidates) {
    const auto d = dist[instance.successor(s, a).value];
    if (!d) continue;
    if (!best_d || *d < *best_d) {
      best_d = d;
      best.clear();
    }
    if (*d == *best_d) best.push_back(a);
  }
  return best;
}

class InformedLeader final : public LeaderPolicy {
 public:
  explicit InformedLeader(IdgInstance instance)
      : instance_(std::move(instance)),
        dist_(detail::distances_to_goal(instance_, [this](StateId, ActionId, StateId t) {
          return instance_.state_class(t) != StateClass::Harmful;
        })) {}

  std::string descriptor() const override { return "informed"; }

  Distribution propose(const LeaderBeliefState& belief) const override {
    const StateId s = belief.observation.state;
    const auto all = all_actions(instance_, s);
    if (auto best = closest(instance_, s, all, dist_); !best.empty()) return uniform_over(best);
    std::vector<ActionId> safe;
    for (ActionId a : all) {
      if (classify_action(instance_, s, a) != ActionClass::Harmful) safe.push_back(a);
    }
    return uniform_over(safe.empty() ? all : safe);
  }

 private:
  IdgInstance instance_;
  std::vector<std::optional<std::size_t>> dist_;
};

class ReplanningLeader final : public LeaderPolicy {
 public:
  explicit ReplanningLeader(const IdgInstance& instance) : believed_(instance.masked()) {}

  std::string descriptor() const override { return "replanning"; }
  bool uses_veto_memory() const override { return true; }

  Distribution propose(const LeaderBeliefState& belief) const override {
    const StateId s = belief.observation.state;
    const auto dist = detail::distances_to_goal(
        believed_, [&](StateId from, ActionId a, StateId) { return !belief.vetoes.contains(from, a); });
    std::vector<ActionId> open;
    for (ActionId a : all_actions(believed_, s)) {
      if (!belief.vetoes.contains(s, a)) open.push_back(a);
    }
    if (open.empty()) open = all_actions(believed_, s);
    if (auto best = closest(believed_, s, open, dist); !best.empty()) return uniform_over(best);
    return uniform_over(open);
  }

 private:
  IdgInstance believed_;
};

class UniformLeader final : public LeaderPolicy {
 public:
  explicit UniformLeader(IdgInstance instance) : instance_(std::move(instance)) {}
  std::string descriptor() const override { return "uniform"; }
  Distribution propose(const LeaderBeliefState& belief) const override {
    return uniform_over(all_actions(instance_, belief.observation.state));
  }

 private:
  IdgInstance instance_;
};

class TableLeader final : public LeaderPolicy {
 public:
  TableLeader(IdgInstance instance, std::map<StateId, Distribution> table, std::string descriptor)
      : instance_(std::move(instance)), table_(std::move(table)), descriptor_(std::move(descriptor)) {}
  std::string descriptor() const override { return descriptor_; }
  Distribution propose(const LeaderBeliefState& belief) const override {
    const StateId s = belief.observation.state;
    if (auto it = table_.find(s); it != table_.end()) return it->second;
    return uniform_over(all_actions(instance_, s));
  }

 private:
  IdgInstance instance_;
  std::map<StateId, Distribution> table_;
  std::string descriptor_;
};

}  // namespace

LeaderPolicyPtr leader_replanning_policy(const IdgInstance& instance) {
  return std::make_shared<ReplanningLeader>(instance);
}

LeaderPolicyPtr informed_leader_policy(const IdgInstance& instance) {
  return std::make_shared<InformedLeader>(instance);
}

LeaderPolicyPtr uniform_leader_policy(const IdgInstance& instance) {
  return std::make_shared<UniformLeader>(instance);
}

LeaderPolicyPtr table_leader_policy(const IdgInstance& instance,
                                    std::map<StateId, Distribution> table,
                                    std::string descriptor) {
  for (const auto& [s, d] : table) {
    Rational total(0);
    for (const auto& p : d) {
      instance.action(s, p.action);
      total += p.probability;
    }
    if (total != Rational(1)) {
      throw RejectedInput("leader distribution at '" + instance.state_name(s) +
                          "' does not sum to 1");
    }
  }
  return std::make_shared<TableLeader>(instance, std::move(table), std::move(descriptor));
}

FollowerPolicy::FollowerPolicy(const IdgInstance& instance, FollowerAction fill,
                               std::string descriptor)
    : descriptor_(std::move(descriptor)) {
  table_.resize(instance.state_count());
  for (std::uint32_t s = 0; s < instance.state_count(); ++s) {
    table_[s].assign(instance.actions(StateId{s}).size(), fill);
  }
}

FollowerAction FollowerPolicy::decide(StateId s, ActionId a) const {
  if (s.value >= table_.size() || a.value >= table_[s.value].size()) {
    throw RejectedInput("follower policy has no decision for state " + std::to_string(s.value) +
                        ", action " + std::to_string(a.value));
  }
  return table_[s.value][a.value];
}

void FollowerPolicy::set(StateId s, ActionId a, FollowerAction d) {
  decide(s, a);
  table_[s.value][a.value] = d;
}

FollowerPolicy follower_optimal_policy(const IdgInstance& instance) {
  FollowerPolicy p(instance, FollowerAction::Obey, "optimal");
  for (std::uint32_t s = 0; s < instance.state_count(); ++s) {
    for (std::uint32_t a = 0; a < instance.actions(StateId{s}).size(); ++a) {
      if (classify_action(instance, StateId{s}, ActionId{a}) == ActionClass::Harmful) {
        p.set(StateId{s}, ActionId{a}, FollowerAction::Disobey);
      }
    }
  }
  return p;
}

FollowerPolicy always_obey_policy(const IdgInstance& instance) {
  return FollowerPolicy(instance, FollowerAction::Obey, "always-obey");
}

}  // namespace idg
