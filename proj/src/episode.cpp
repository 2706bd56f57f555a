#include "idg/episode.hpp"

#include <sstream>

#include "idg/error.hpp"
#include "idg/game.hpp"
#include "text_util.hpp"

namespace idg {

int leader_reward(const IdgInstance& instance, StateId, ActionId, StateId next) {
  switch (instance.state_class(next)) {
    case StateClass::Goal:
      return 1;
    case StateClass::Harmful:
      return -1;
    case StateClass::Other:
      break;
  }
  return 0;
}

int follower_reward(const IdgInstance& instance, StateId s, ActionId a, FollowerAction decision,
                    StateId next) {
  if (decision == FollowerAction::Disobey) {
    return instance.state_class(instance.successor(s, a)) == StateClass::Harmful ? 1 : -1;
  }
  return instance.state_class(next) == StateClass::Harmful ? -1 : 0;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Goal:
      return "goal";
    case Outcome::Harm:
      return "harm";
    case Outcome::StepBudgetExhausted:
      break;
  }
  return "budget";
}

int EpisodeLog::leader_return() const {
  int total = 0;
  for (const auto& r : steps) total += r.leader_reward;
  return total;
}

int EpisodeLog::follower_return() const {
  int total = 0;
  for (const auto& r : steps) total += r.follower_reward;
  return total;
}

std::size_t default_max_steps(const IdgInstance& instance) { return 10 * instance.state_count(); }

StepRecord make_step(const IdgInstance& instance, std::size_t turn, StateId s, ActionId a,
                     FollowerAction decision) {
  StepRecord r;
  r.turn = turn;
  r.before = s;
  r.observation = observe(instance, s);
  r.proposal = a;
  r.decision = decision;
  r.after = apply_protocol(instance, s, a, decision);
  r.leader_reward = leader_reward(instance, s, a, r.after);
  r.follower_reward = follower_reward(instance, s, a, decision, r.after);
  return r;
}

namespace {

std::optional<Outcome> outcome_at(const IdgInstance& instance, StateId s) {
  switch (instance.state_class(s)) {
    case StateClass::Goal:
      return Outcome::Goal;
    case StateClass::Harmful:
      return Outcome::Harm;
    case StateClass::Other:
      break;
  }
  return std::nullopt;
}

}  // namespace

EpisodeLog run_episode(const IdgInstance& instance, const LeaderPolicy& leader,
                       const FollowerPolicy& follower, std::size_t max_steps, std::uint64_t seed) {
  if (max_steps == 0) throw RejectedInput("max_steps must be at least 1");
  if (is_terminal(instance, instance.start())) {
    throw RejectedInput("start state '" + instance.state_name(instance.start()) +
                        "' is terminal");
  }
  Rng rng(seed);
  EpisodeLog log;
  log.instance_ref = instance_fingerprint(instance);
  log.seed = seed;
  log.leader = leader.descriptor();
  log.follower = follower.descriptor();

  LeaderBeliefState belief = initial_belief(instance, instance.start());
  StateId s = instance.start();
  for (std::size_t turn = 0; turn < max_steps; ++turn) {
    const ActionId a = sample(leader.propose(belief), rng);
    const FollowerAction d = follower.decide(s, a);
    StepRecord rec = make_step(instance, turn, s, a, d);
    advance_belief(instance, belief, a, d, rec.after);
    s = rec.after;
    log.steps.push_back(std::move(rec));
    if (auto o = outcome_at(instance, s)) {
      log.outcome = o;
      return log;
    }
  }
  log.outcome = Outcome::StepBudgetExhausted;
  return log;
}

void verify_replay(const IdgInstance& instance, const EpisodeLog& log) {
  StateId s = instance.start();
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const StepRecord& r = log.steps[i];
    const std::string where = "step " + std::to_string(i) + ": ";
    if (r.turn != i) throw RejectedInput(where + "turn index out of order");
    if (r.before != s) throw RejectedInput(where + "state before does not match replay");
    if (is_terminal(instance, s)) throw RejectedInput(where + "move after a terminal state");
    const StepRecord expect = make_step(instance, i, s, r.proposal, r.decision);
    if (r.after != expect.after) throw RejectedInput(where + "successor does not match protocol");
    if (r.leader_reward != expect.leader_reward || r.follower_reward != expect.follower_reward) {
      throw RejectedInput(where + "rewards do not match the reward functions");
    }
    if (r.observation != expect.observation) throw RejectedInput(where + "observation mismatch");
    s = r.after;
  }
  if (!log.outcome) {
    if (is_terminal(instance, s)) throw RejectedInput("log reached a terminal state without outcome");
    return;
  }
  const auto at_end = outcome_at(instance, s);
  const bool ok = at_end ? *log.outcome == *at_end : *log.outcome == Outcome::StepBudgetExhausted;
  if (!ok) throw RejectedInput("recorded outcome does not match the final state");
}

std::string serialize_episode_log(const IdgInstance& instance, const EpisodeLog& log) {
  std::ostringstream out;
  out << "idg-episode 1\n";
  out << "instance " << log.instance_ref << '\n';
  out << "seed " << log.seed << '\n';
  out << "leader " << log.leader << '\n';
  out << "follower " << log.follower << '\n';
  for (const auto& r : log.steps) {
    out << "step " << r.turn << ' ' << instance.state_name(r.before) << ' '
        << instance.action(r.before, r.proposal).label << ' ' << to_string(r.decision) << ' '
        << instance.state_name(r.after) << ' ' << r.leader_reward << ' ' << r.follower_reward
        << '\n';
  }
  out << "outcome " << (log.outcome ? to_string(*log.outcome) : std::string_view("none")) << '\n';
  return out.str();
}

EpisodeLog parse_episode_log(const IdgInstance& instance, std::string_view text) {
  EpisodeLog log;
  int field = 0;  // index of the next expected header line
  bool done = false;
  static constexpr std::string_view kHeader[] = {"idg-episode", "instance", "seed", "leader",
                                                 "follower"};
  auto state = [&](const detail::Token& t, std::size_t line) {
    auto id = instance.find_state(t.text);
    if (!id) throw ParseError(line, t.column, "unknown state '" + std::string(t.text) + "'");
    return *id;
  };
  detail::for_each_line(text, [&](std::size_t line, const std::vector<detail::Token>& toks) {
    if (done) throw ParseError(line, toks[0].column, "content after outcome line");
    const std::string_view kw = toks[0].text;
    if (field < 5) {
      if (kw != kHeader[field]) {
        throw ParseError(line, toks[0].column, "expected '" + std::string(kHeader[field]) + "'");
      }
      detail::expect_arity(toks, 2, line);
      switch (field) {
        case 0:
          if (toks[1].text != "1") throw ParseError(line, toks[1].column, "unsupported version");
          break;
        case 1:
          log.instance_ref = std::string(toks[1].text);
          break;
        case 2: {
          std::uint64_t v = 0;
          for (char c : toks[1].text) {
            if (c < '0' || c > '9') throw ParseError(line, toks[1].column, "bad seed");
            v = v * 10 + static_cast<std::uint64_t>(c - '0');
          }
          log.seed = v;
          break;
        }
        case 3:
          log.leader = std::string(toks[1].text);
          break;
        case 4:
          log.follower = std::string(toks[1].text);
          break;
      }
      ++field;
      return;
    }
    if (kw == "step") {
      detail::expect_arity(toks, 8, line);
      StepRecord r;
      r.turn = static_cast<std::size_t>(detail::parse_int(toks[1], line));
      r.before = state(toks[2], line);
      auto a = instance.find_action(r.before, toks[3].text);
      if (!a) throw ParseError(line, toks[3].column, "unknown action '" + std::string(toks[3].text) + "'");
      r.proposal = *a;
      if (toks[4].text == "obey") {
        r.decision = FollowerAction::Obey;
      } else if (toks[4].text == "disobey") {
        r.decision = FollowerAction::Disobey;
      } else {
        throw ParseError(line, toks[4].column, "decision must be obey or disobey");
      }
      r.after = state(toks[5], line);
      r.leader_reward = static_cast<int>(detail::parse_int(toks[6], line, true));
      r.follower_reward = static_cast<int>(detail::parse_int(toks[7], line, true));
      r.observation = observe(instance, r.before);
      log.steps.push_back(std::move(r));
    } else if (kw == "outcome") {
      detail::expect_arity(toks, 2, line);
      const auto o = toks[1].text;
      if (o == "goal") {
        log.outcome = Outcome::Goal;
      } else if (o == "harm") {
        log.outcome = Outcome::Harm;
      } else if (o == "budget") {
        log.outcome = Outcome::StepBudgetExhausted;
      } else if (o != "none") {
        throw ParseError(line, toks[1].column, "unknown outcome '" + std::string(o) + "'");
      }
      done = true;
    } else {
      throw ParseError(line, toks[0].column, "unknown record '" + std::string(kw) + "'");
    }
  });
  if (!done) throw ParseError(1, 0, "episode log is missing its outcome line");
  verify_replay(instance, log);
  return log;
}

}  // namespace idg
