#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "idg/episode.hpp"
#include "idg/instance.hpp"
#include "idg/observation.hpp"
#include "idg/policy.hpp"

namespace idg {

struct TrainConfig {
  std::size_t episodes = 50000;
  std::size_t max_steps = 0;  // 0: 10 * |S|
  double alpha = 0.1;
  double gamma = 0.99;
  // Kept below 1/2 so the discounted stream of future veto rewards
  // (at most gamma / (1 - gamma) < 1) can never pay for vetoing a safe move.
  double follower_gamma = 0.4;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::size_t decay_episodes = 0;  // 0: first 80% of the episodes
  std::uint64_t seed = 0;

  void validate() const;
  double epsilon(std::size_t episode) const;
};

// Leader values keyed on what the leader observes, never on raw states.
class LeaderQTable {
 public:
  struct Row {
    std::vector<double> q;
    std::vector<std::uint64_t> visits;
  };

  // Zero row if the observation was never visited.
  Row row(const Observation& obs) const;
  double max_value(const Observation& obs) const;
  ActionId greedy(const Observation& obs) const;

  // One-step Q-learning update; `next` is nullptr for terminal successors.
  void update(const Observation& obs, ActionId a, double reward, const Observation* next,
              double alpha, double gamma);
  void set(const Observation& obs, ActionId a, double value, std::uint64_t visits);

  const std::map<Observation, Row>& rows() const { return rows_; }

 private:
  Row& touch(const Observation& obs);
  std::map<Observation, Row> rows_;
};

// Follower values keyed on the full state plus the leader's proposal.
class FollowerQTable {
 public:
  explicit FollowerQTable(const IdgInstance& instance);

  double value(StateId s, ActionId a, FollowerAction d) const;
  std::uint64_t visits(StateId s, ActionId a, FollowerAction d) const;
  std::uint64_t pair_visits(StateId s, ActionId a) const;
  double max_value(StateId s, ActionId a) const;
  FollowerAction greedy(StateId s, ActionId a) const;

  // Target is reward + gamma * next_value (pass 0 for terminal successors).
  void update(StateId s, ActionId a, FollowerAction d, double reward, double next_value,
              double alpha, double gamma);
  void set(StateId s, ActionId a, FollowerAction d, double value, std::uint64_t visits);

  std::size_t state_count() const { return q_.size(); }
  std::size_t action_count(StateId s) const { return q_.at(s.value).size(); }

 private:
  std::vector<std::vector<std::array<double, 2>>> q_;
  std::vector<std::vector<std::array<std::uint64_t, 2>>> visits_;
};

struct EpisodeSummary {
  int leader_return = 0;
  int follower_return = 0;
  Outcome outcome = Outcome::StepBudgetExhausted;
  std::size_t steps = 0;
};

struct TrainResult {
  LeaderQTable leader;
  FollowerQTable follower;
  std::vector<EpisodeSummary> curve;
};

// Independent epsilon-greedy Q-learners for leader and follower.
TrainResult train(const IdgInstance& instance, const TrainConfig& config);

// Greedy policies read off the tables; ties go to the lowest action id
// (Obey before Disobey).
LeaderPolicyPtr greedy_leader_policy(const LeaderQTable& table);
FollowerPolicy greedy_follower_policy(const IdgInstance& instance, const FollowerQTable& table);

struct Metrics {
  std::size_t episodes = 0;
  double success_rate = 0;
  double harm_rate = 0;
  double budget_rate = 0;
  double avg_leader_return = 0;
  double avg_follower_return = 0;
  double avg_steps = 0;
  // Vacuously 1 when there was nothing to measure.
  double veto_precision = 1;
  double veto_recall = 1;
  std::size_t disobeys = 0;
  std::size_t harmful_proposals = 0;
  std::size_t harmful_disobeys = 0;
};

// Episode i runs with seed derive_seed(seed, i).
Metrics evaluate(const IdgInstance& instance, const LeaderPolicy& leader,
                 const FollowerPolicy& follower, std::size_t episodes, std::size_t max_steps,
                 std::uint64_t seed);

// Versioned text format:
//
//   idg-qtables 1
//   instance <fingerprint>
//   leader-rows <n>
//   L <state> <action> <value> <visits>      one per (observation, action)
//   follower-rows <n>
//   F <state> <action> <obey|disobey> <value> <visits>
//
// Values use the shortest round-trip decimal form.
std::string serialize_tables(const IdgInstance& instance, const LeaderQTable& leader,
                             const FollowerQTable& follower);

struct LoadedTables {
  LeaderQTable leader;
  FollowerQTable follower;
};

LoadedTables parse_tables(const IdgInstance& instance, std::string_view text);

// CSV with header "episode,leader_return,follower_return,outcome".
std::string curves_csv(const std::vector<EpisodeSummary>& curve);

}  // namespace idg
