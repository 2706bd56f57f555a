#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idg/instance.hpp"
#include "idg/observation.hpp"
#include "idg/policy.hpp"

namespace idg {

// R_L: +1 on entering a goal, -1 on entering a harmful state, else 0.
int leader_reward(const IdgInstance& instance, StateId s, ActionId a, StateId next);
// R_F: rewards vetoing harm, penalises vetoing anything else and obeying harm.
int follower_reward(const IdgInstance& instance, StateId s, ActionId a, FollowerAction decision,
                    StateId next);

struct StepRecord {
  std::size_t turn = 0;
  StateId before;
  Observation observation;
  ActionId proposal;
  FollowerAction decision = FollowerAction::Obey;
  StateId after;
  int leader_reward = 0;
  int follower_reward = 0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

// Applies the protocol and fills in rewards for one turn.
StepRecord make_step(const IdgInstance& instance, std::size_t turn, StateId s, ActionId a,
                     FollowerAction decision);

enum class Outcome { Goal, Harm, StepBudgetExhausted };
std::string_view to_string(Outcome o);

struct EpisodeLog {
  std::string instance_ref;
  std::uint64_t seed = 0;
  std::string leader;
  std::string follower;
  std::vector<StepRecord> steps;
  std::optional<Outcome> outcome;  // nullopt while still in progress

  int leader_return() const;
  int follower_return() const;

  friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

std::size_t default_max_steps(const IdgInstance& instance);

// One run of the shared-control loop: observe, propose, decide, apply.
EpisodeLog run_episode(const IdgInstance& instance, const LeaderPolicy& leader,
                       const FollowerPolicy& follower, std::size_t max_steps, std::uint64_t seed);

// Throws RejectedInput if replaying the log from the start state does not
// reproduce every recorded transition and reward.
void verify_replay(const IdgInstance& instance, const EpisodeLog& log);

// Line-delimited log format:
//
//   idg-episode 1
//   instance <ref>
//   seed <n>
//   leader <descriptor>
//   follower <descriptor>
//   step <turn> <before> <proposal> <obey|disobey> <after> <r_L> <r_F>
//   ...
//   outcome <goal|harm|budget|none>
std::string serialize_episode_log(const IdgInstance& instance, const EpisodeLog& log);
EpisodeLog parse_episode_log(const IdgInstance& instance, std::string_view text);

}  // namespace idg
