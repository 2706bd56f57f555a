#include <doctest.h>

#include "idg/error.hpp"
#include "idg/episode.hpp"
#include "idg/game.hpp"
#include "idg/observation.hpp"
#include "idg/solver.hpp"
#include "support/oracles.hpp"

using namespace idg;

namespace {

StateId at(const IdgInstance& g, const std::string& name) { return g.find_state(name).value(); }

bool contains_ci(std::string hay, std::string needle) {
  for (auto* s : {&hay, &needle}) {
    for (auto& c : *s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("rewards") {
  const auto li = oracle::t3();
  const auto& g = li.game;
  const StateId s12 = at(g, "(1,2)"), s20 = at(g, "(2,0)"), s00 = at(g, "(0,0)");
  const ActionId right = g.find_action(s12, "right").value();
  const ActionId down = g.find_action(s20, "down").value();
  const ActionId r00 = g.find_action(s00, "right").value();

  CHECK(leader_reward(g, s12, right, at(g, "(2,2)")) == 1);
  CHECK(leader_reward(g, s20, down, s20) == 0);
  CHECK(leader_reward(g, s20, down, at(g, "(2,1)")) == -1);

  CHECK(follower_reward(g, s20, down, FollowerAction::Disobey, s20) == 1);
  CHECK(follower_reward(g, s00, r00, FollowerAction::Disobey, s00) == -1);
  CHECK(follower_reward(g, s00, r00, FollowerAction::Obey, at(g, "(1,0)")) == 0);
  CHECK(follower_reward(g, s20, down, FollowerAction::Obey, at(g, "(2,1)")) == -1);
  CHECK(follower_reward(g, s12, right, FollowerAction::Disobey, s12) == -1);
}

TEST_CASE("rewards and game payoffs are the same table") {
  std::mt19937_64 rng(123);
  std::set<std::pair<ActionClass, FollowerAction>> seen;
  for (int i = 0; i < 200; ++i) {
    const auto inst = oracle::random_instance(rng);
    for (std::uint32_t s = 0; s < inst.state_count(); ++s) {
      for (std::uint32_t a = 0; a < inst.actions(StateId{s}).size(); ++a) {
        for (auto d : {FollowerAction::Obey, FollowerAction::Disobey}) {
          const StateId next = apply_protocol(inst, StateId{s}, ActionId{a}, d);
          const auto c = classify_action(inst, StateId{s}, ActionId{a});
          const StepPayoff p = step_payoff(c, d);
          CHECK(leader_reward(inst, StateId{s}, ActionId{a}, next) == p.leader);
          CHECK(follower_reward(inst, StateId{s}, ActionId{a}, d, next) == p.follower);
          seen.insert({c, d});
        }
      }
    }
  }
  CHECK(seen.size() == 6);
}

TEST_CASE("observation masking") {
  const auto with = oracle::t3();
  const auto without = load_instance_document("grid 3 3\nstart 0 0\ngoal 2 2\nlava 2 1\n");
  CHECK(observe(with.game, with.game.start()) == observe(without.game, without.game.start()));
  CHECK(observe(with.game, with.game.start()).render() ==
        observe(without.game, without.game.start()).render());

  const auto obs = observe(with.game, at(with.game, "(1,2)"));
  bool right_is_goal = false;
  for (const auto& a : obs.actions) right_is_goal |= a.label == "right" && a.goal_reaching;
  CHECK(right_is_goal);

  for (std::uint32_t s = 0; s < with.game.state_count(); ++s) {
    CHECK_FALSE(contains_ci(observe(with.game, StateId{s}).render(), "harm"));
  }
}

TEST_CASE("observations ignore harmful relabelling") {
  // Turning Other states (not the start) into harmful ones, keeping their
  // moves as believed moves, must not change any observation.
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    const auto inst = oracle::random_instance(rng);
    auto specs = inst.states();
    for (std::size_t s = 1; s < specs.size(); ++s) {
      if (specs[s].kind == StateClass::Other && rng() % 2) specs[s].kind = StateClass::Harmful;
    }
    const auto relabelled = IdgInstance::build(specs, inst.start());
    for (std::uint32_t s = 0; s < inst.state_count(); ++s) {
      // The leader only ever observes where it gets to act.
      if (is_terminal(relabelled, StateId{s})) continue;
      const auto a = observe(inst, StateId{s});
      const auto b = observe(relabelled, StateId{s});
      CHECK(a == b);
      // Goal-reaching flags survive.
      for (std::size_t k = 0; k < a.actions.size(); ++k) {
        const auto target = inst.masked().actions(StateId{s})[k].target;
        CHECK(a.actions[k].goal_reaching == (inst.state_class(target) == StateClass::Goal));
      }
    }
  }
}

TEST_CASE("run_episode examples") {
  SUBCASE("informed leader on T3") {
    const auto li = oracle::t3();
    const auto log = run_episode(li.game, *informed_leader_policy(li.game),
                                 follower_optimal_policy(li.game), 90, 5);
    CHECK(log.outcome == std::optional<Outcome>{Outcome::Goal});
    CHECK(log.steps.size() == 4);
    CHECK(log.leader_return() == 1);
    for (const auto& st : log.steps) CHECK(st.leader_reward != -1);
  }
  SUBCASE("TRAP4 runs out of budget") {
    const auto trap = oracle::trap4();
    for (const auto& leader : {uniform_leader_policy(trap), leader_replanning_policy(trap),
                               informed_leader_policy(trap)}) {
      const auto log = run_episode(trap, *leader, follower_optimal_policy(trap), 50, 9);
      CHECK(log.outcome == std::optional<Outcome>{Outcome::StepBudgetExhausted});
      CHECK(log.steps.size() == 50);
      CHECK(log.leader_return() == 0);
    }
  }
  SUBCASE("a single goal step") {
    const auto g = oracle::one_step_state(1, 0, 0);
    const auto log = run_episode(g, *informed_leader_policy(g), follower_optimal_policy(g), 1, 0);
    CHECK(log.outcome == std::optional<Outcome>{Outcome::Goal});
    CHECK(log.steps.size() == 1);
  }
  SUBCASE("preconditions") {
    const auto g = oracle::one_step_state(1, 0, 0);
    CHECK_THROWS_AS(run_episode(g, *uniform_leader_policy(g), follower_optimal_policy(g), 0, 0),
                    RejectedInput);
    const auto terminal_start = IdgInstance::build(
        {{"g", StateClass::Goal, {}}, {"a", StateClass::Other, {{"x", StateId{0}}}}}, StateId{0});
    CHECK_THROWS_AS(run_episode(terminal_start, *uniform_leader_policy(terminal_start),
                                follower_optimal_policy(terminal_start), 5, 0),
                    RejectedInput);
  }
}

TEST_CASE("episode determinism, veto safety and log round trip") {
  std::mt19937_64 rng(64);
  int checked = 0;
  for (int i = 0; i < 150; ++i) {
    const auto inst = oracle::random_instance(rng);
    if (is_terminal(inst, inst.start())) continue;
    const auto follower = follower_optimal_policy(inst);
    for (const auto& leader : {uniform_leader_policy(inst), leader_replanning_policy(inst)}) {
      const std::uint64_t seed = rng();
      const auto a = run_episode(inst, *leader, follower, 40, seed);
      const auto b = run_episode(inst, *leader, follower, 40, seed);
      CHECK(a == b);
      CHECK(a.outcome.has_value());
      for (const auto& st : a.steps) CHECK(st.leader_reward != -1);
      CHECK(a.outcome != std::optional<Outcome>{Outcome::Harm});

      const std::string text = serialize_episode_log(inst, a);
      const auto parsed = parse_episode_log(inst, text);
      CHECK(parsed == a);
      CHECK(serialize_episode_log(inst, parsed) == text);
      CHECK_NOTHROW(verify_replay(inst, a));
      ++checked;
    }
    const auto obedient = run_episode(inst, *uniform_leader_policy(inst), always_obey_policy(inst), 40, 1);
    const auto text = serialize_episode_log(inst, obedient);
    CHECK(parse_episode_log(inst, text) == obedient);
    if (obedient.outcome == std::optional<Outcome>{Outcome::Harm}) {
      CHECK(obedient.steps.back().leader_reward == -1);
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("log parsing rejects tampering") {
  const auto li = oracle::t3();
  const auto log = run_episode(li.game, *informed_leader_policy(li.game),
                               follower_optimal_policy(li.game), 20, 3);
  const std::string text = serialize_episode_log(li.game, log);
  CHECK(text.rfind("idg-episode 1\n", 0) == 0);

  auto replace = [&](const std::string& from, const std::string& to) {
    std::string t = text;
    const auto pos = t.find(from);
    REQUIRE(pos != std::string::npos);
    t.replace(pos, from.size(), to);
    return t;
  };
  CHECK_THROWS_AS(parse_episode_log(li.game, replace("outcome goal", "outcome harm")), RejectedInput);
  CHECK_THROWS_AS(parse_episode_log(li.game, replace(" 1 0\noutcome", " 0 0\noutcome")), RejectedInput);
  CHECK_THROWS_AS(parse_episode_log(li.game, replace("step 0", "step 5")), RejectedInput);
  CHECK_THROWS_AS(parse_episode_log(li.game, ""), RejectedInput);

  EpisodeLog open;
  open.instance_ref = li.id;
  open.leader = "human";
  open.follower = "optimal";
  const auto t = serialize_episode_log(li.game, open);
  CHECK(parse_episode_log(li.game, t) == open);
}
