#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "idg/instance.hpp"
#include "idg/observation.hpp"
#include "idg/rng.hpp"
#include "idg/types.hpp"

namespace idg {

struct Proposal {
  ActionId action;
  Rational probability;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

// Mixed leader move: support in ascending ActionId order, weights summing to 1.
using Distribution = std::vector<Proposal>;

Distribution uniform_over(const std::vector<ActionId>& support);
Distribution point_mass(ActionId a);
// Exact sampling: draws an integer below the common denominator.
ActionId sample(const Distribution& d, Rng& rng);

// Actions the follower has refused, remembered per observed state for the
// rest of the episode.
class VetoMemory {
 public:
  bool contains(StateId s, ActionId a) const;
  const std::set<ActionId>& at(StateId s) const;
  void add(StateId s, ActionId a) { vetoed_[s].insert(a); }
  void clear(StateId s) { vetoed_.erase(s); }
  bool empty() const { return vetoed_.empty(); }

  friend auto operator<=>(const VetoMemory&, const VetoMemory&) = default;

 private:
  std::map<StateId, std::set<ActionId>> vetoed_;
};

struct LeaderBeliefState {
  Observation observation;
  VetoMemory vetoes;

  const std::set<ActionId>& vetoed_here() const { return vetoes.at(observation.state); }

  // Remembers a disobeyed proposal at the current observation. Once every
  // action there has been refused the set at this observation is reset.
  void record_veto(ActionId a);

  friend auto operator<=>(const LeaderBeliefState&, const LeaderBeliefState&) = default;
};

LeaderBeliefState initial_belief(const IdgInstance& instance, StateId s);

// Belief after the follower answered proposal `a` and the protocol moved to
// `next` (equal to the current state on a veto).
void advance_belief(const IdgInstance& instance, LeaderBeliefState& belief, ActionId a,
                    FollowerAction decision, StateId next);

class LeaderPolicy {
 public:
  virtual ~LeaderPolicy() = default;
  virtual std::string descriptor() const = 0;
  virtual Distribution propose(const LeaderBeliefState& belief) const = 0;
  // False when propose() depends on the observation alone.
  virtual bool uses_veto_memory() const { return false; }
};

using LeaderPolicyPtr = std::shared_ptr<const LeaderPolicy>;

// Goal-directed leader with veto memory, planning on the masked map only.
LeaderPolicyPtr leader_replanning_policy(const IdgInstance& instance);
// Goal-directed leader that sees harmful labels. Used as the oracle for
// value tables and the exact-distance finite-time check.
LeaderPolicyPtr informed_leader_policy(const IdgInstance& instance);
LeaderPolicyPtr uniform_leader_policy(const IdgInstance& instance);
// Explicit per-state distributions; states without an entry fall back to
// uniform over their actions.
LeaderPolicyPtr table_leader_policy(const IdgInstance& instance,
                                    std::map<StateId, Distribution> table,
                                    std::string descriptor);

// Deterministic obey/disobey decision for every (state, proposal) pair.
class FollowerPolicy {
 public:
  FollowerPolicy(const IdgInstance& instance, FollowerAction fill, std::string descriptor);

  FollowerAction decide(StateId s, ActionId a) const;
  void set(StateId s, ActionId a, FollowerAction d);
  const std::string& descriptor() const { return descriptor_; }

  friend bool operator==(const FollowerPolicy&, const FollowerPolicy&) = default;

 private:
  std::vector<std::vector<FollowerAction>> table_;
  std::string descriptor_;
};

FollowerPolicy follower_optimal_policy(const IdgInstance& instance);
FollowerPolicy always_obey_policy(const IdgInstance& instance);

struct StrategyProfile {
  LeaderPolicyPtr leader;
  FollowerPolicy follower;
};

}  // namespace idg
