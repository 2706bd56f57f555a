#include <doctest.h>

#include "idg/error.hpp"
#include "idg/game.hpp"
#include "support/oracles.hpp"

using namespace idg;

namespace {

StateId at(const IdgInstance& g, const std::string& name) { return g.find_state(name).value(); }
ActionId act(const IdgInstance& g, StateId s, const std::string& label) {
  return g.find_action(s, label).value();
}

}  // namespace

TEST_CASE("step_payoff matches the six-leaf table exactly") {
  using A = ActionClass;
  using F = FollowerAction;
  const std::tuple<A, F, int, int> table[] = {
      {A::GoalReaching, F::Obey, 1, 0},  {A::GoalReaching, F::Disobey, 0, -1},
      {A::Harmful, F::Obey, -1, -1},     {A::Harmful, F::Disobey, 0, 1},
      {A::Other, F::Obey, 0, 0},         {A::Other, F::Disobey, 0, -1},
  };
  for (const auto& [c, d, l, f] : table) {
    CAPTURE(to_string(c));
    CAPTURE(to_string(d));
    CHECK(step_payoff(c, d) == StepPayoff{l, f});
  }
  static_assert(step_payoff(ActionClass::Harmful, FollowerAction::Disobey) == StepPayoff{0, 1});
}

TEST_CASE("classify_action on T3 agrees with coordinate arithmetic") {
  const auto li = oracle::t3();
  const auto& g = li.game;
  const auto& grid = *li.grid;
  CHECK(classify_action(g, at(g, "(1,2)"), act(g, at(g, "(1,2)"), "right")) == ActionClass::GoalReaching);
  CHECK(classify_action(g, at(g, "(0,0)"), act(g, at(g, "(0,0)"), "right")) == ActionClass::Other);
  CHECK(classify_action(g, at(g, "(1,0)"), act(g, at(g, "(1,0)"), "right")) == ActionClass::Other);
  CHECK(classify_action(g, at(g, "(2,0)"), act(g, at(g, "(2,0)"), "down")) == ActionClass::Harmful);

  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 3; ++x) {
      const oracle::Tile t{x, y};
      const StateId s = at(g, oracle::name(t));
      if (is_terminal(g, s)) continue;
      for (std::uint32_t a = 0; a < g.actions(s).size(); ++a) {
        const auto next = oracle::step(grid, t, g.actions(s)[a].label);
        REQUIRE(next.has_value());
        const ActionClass expected = oracle::is_goal(grid, *next)   ? ActionClass::GoalReaching
                                     : oracle::is_lava(grid, *next) ? ActionClass::Harmful
                                                                    : ActionClass::Other;
        CHECK(classify_action(g, s, ActionId{a}) == expected);
      }
    }
  }
}

TEST_CASE("apply_protocol") {
  const auto li = oracle::t3();
  const auto& g = li.game;
  const StateId s00 = at(g, "(0,0)");
  CHECK(apply_protocol(g, s00, act(g, s00, "down"), FollowerAction::Obey) == at(g, "(0,1)"));
  const StateId s12 = at(g, "(1,2)");
  const StateId goal = apply_protocol(g, s12, act(g, s12, "right"), FollowerAction::Obey);
  CHECK(goal == at(g, "(2,2)"));
  CHECK(is_terminal(g, goal));

  SUBCASE("disobey is the identity everywhere") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
      const auto inst = oracle::random_instance(rng);
      for (std::uint32_t s = 0; s < inst.state_count(); ++s) {
        for (std::uint32_t a = 0; a < inst.actions(StateId{s}).size(); ++a) {
          CHECK(apply_protocol(inst, StateId{s}, ActionId{a}, FollowerAction::Disobey) == StateId{s});
        }
      }
    }
  }
  SUBCASE("invalid indices are rejected") {
    CHECK_THROWS_AS(apply_protocol(g, StateId{99}, ActionId{0}, FollowerAction::Obey), RejectedInput);
    CHECK_THROWS_AS(apply_protocol(g, s00, ActionId{7}, FollowerAction::Obey), RejectedInput);
    CHECK_THROWS_AS(classify_action(g, s00, ActionId{7}), RejectedInput);
    CHECK_THROWS_AS(is_terminal(g, StateId{9}), RejectedInput);
  }
}

TEST_CASE("class and successor coherence on random instances") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto inst = oracle::random_instance(rng);
    for (std::uint32_t s = 0; s < inst.state_count(); ++s) {
      for (std::uint32_t a = 0; a < inst.actions(StateId{s}).size(); ++a) {
        const auto next = inst.successor(StateId{s}, ActionId{a});
        const auto c = classify_action(inst, StateId{s}, ActionId{a});
        CHECK((c == ActionClass::GoalReaching) == (inst.state_class(next) == StateClass::Goal));
        CHECK((c == ActionClass::Harmful) == (inst.state_class(next) == StateClass::Harmful));
      }
    }
  }
}

TEST_CASE("is_terminal on T3") {
  const auto li = oracle::t3();
  CHECK(is_terminal(li.game, at(li.game, "(2,2)")));
  CHECK(is_terminal(li.game, at(li.game, "(1,1)")));
  CHECK_FALSE(is_terminal(li.game, at(li.game, "(0,0)")));
  CHECK(li.game.actions(at(li.game, "(1,1)")).empty());
}

TEST_CASE("one-step game tree") {
  SUBCASE("one action per class") {
    const auto g = oracle::one_step_state(1, 1, 1);
    const GameTree tree = build_1idg_tree(g, g.start());
    REQUIRE(tree.branches.size() == 3);
    std::size_t leaves = 0;
    for (const auto& b : tree.branches) {
      leaves += b.leaves.size();
      CHECK(b.in_information_set == (b.action_class != ActionClass::GoalReaching));
      CHECK(b.leaves[0].decision == FollowerAction::Obey);
      CHECK(b.leaves[1].decision == FollowerAction::Disobey);
      for (const auto& leaf : b.leaves) CHECK(leaf.payoff == step_payoff(b.action_class, leaf.decision));
    }
    CHECK(leaves == 6);
    CHECK(tree.information_set.size() == 2);
  }
  SUBCASE("no goal action: the information set covers every branch") {
    const auto g = oracle::one_step_state(0, 2, 1);
    const GameTree tree = build_1idg_tree(g, g.start());
    CHECK(tree.information_set.size() == tree.branches.size());
  }
  SUBCASE("only Other actions") {
    const auto g = oracle::one_step_state(0, 0, 3);
    for (const auto& b : build_1idg_tree(g, g.start()).branches) {
      for (const auto& leaf : b.leaves) {
        CHECK((leaf.payoff == StepPayoff{0, 0} || leaf.payoff == StepPayoff{0, -1}));
      }
    }
  }
  SUBCASE("terminal root") {
    const auto g = oracle::one_step_state(1, 0, 0);
    CHECK_THROWS_AS(build_1idg_tree(g, StateId{1}), RejectedInput);
  }
  SUBCASE("random trees keep goal branches out of the information set") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
      const auto inst = oracle::random_instance(rng);
      for (std::uint32_t s = 0; s < inst.state_count(); ++s) {
        if (is_terminal(inst, StateId{s})) continue;
        for (const auto& b : build_1idg_tree(inst, StateId{s}).branches) {
          CHECK(b.in_information_set == (b.action_class != ActionClass::GoalReaching));
        }
      }
    }
  }
}

TEST_CASE("instance validation") {
  using SC = StateClass;
  auto build = [](std::vector<StateSpec> st) { return IdgInstance::build(std::move(st), StateId{0}); };
  CHECK_THROWS_AS(build({{"a", SC::Goal, {{"x", StateId{0}}}}}), RejectedInput);
  CHECK_THROWS_AS(build({{"a", SC::Other, {}}}), RejectedInput);
  CHECK_THROWS_AS(build({{"a", SC::Other, {{"x", StateId{1}}}}, {"a", SC::Goal, {}}}), RejectedInput);
  CHECK_THROWS_AS(build({{"a", SC::Other, {{"x", StateId{1}}, {"x", StateId{1}}}}, {"g", SC::Goal, {}}}),
                  RejectedInput);
  CHECK_THROWS_AS(build({{"a", SC::Other, {{"x", StateId{5}}}}}), RejectedInput);
  CHECK_THROWS_AS(IdgInstance::build({{"g", SC::Goal, {}}}, StateId{3}), RejectedInput);
  CHECK_NOTHROW(build({{"a", SC::Other, {{"x", StateId{1}}, {"y", StateId{1}}}}, {"g", SC::Goal, {}}}));
}

TEST_CASE("generic instance documents") {
  const auto trap = oracle::trap4();
  CHECK(trap.state_count() == 4);
  CHECK(parse_idg_document(serialize_idg_document(trap)) == trap);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto inst = oracle::random_instance(rng);
    const std::string doc = serialize_idg_document(inst);
    CHECK(parse_idg_document(doc) == inst);
    CHECK(serialize_idg_document(parse_idg_document(doc)) == doc);
  }

  auto error_at = [](const std::string& doc) -> std::pair<std::size_t, std::size_t> {
    try {
      parse_idg_document(doc);
    } catch (const ParseError& e) {
      return {e.line(), e.column()};
    }
    return {0, 0};
  };
  CHECK(error_at("").first == 1);
  CHECK(error_at("idg\nstate a other\nbogus 1\n") == std::pair<std::size_t, std::size_t>{3, 1});
  CHECK(error_at("idg\nstate a sideways\n").first == 2);
  CHECK(error_at("idg\nstate a other\nstart a\naction a x nowhere\n").first == 4);
  CHECK_THROWS_AS(parse_idg_document("idg\nstate a other\nstart a\n"), RejectedInput);
}
