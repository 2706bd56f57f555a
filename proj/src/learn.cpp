#include "idg/learn.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <sstream>

#include "idg/error.hpp"
#include "idg/game.hpp"
#include "idg/rng.hpp"
#include "text_util.hpp"

namespace idg {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void TrainConfig::validate() const {
  if (episodes == 0) throw RejectedInput("episodes must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw RejectedInput("alpha must lie in (0, 1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw RejectedInput("gamma must lie in (0, 1)");
  if (!(follower_gamma >= 0.0 && follower_gamma < 1.0)) {
    throw RejectedInput("follower gamma must lie in [0, 1)");
  }
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0) ||
      !(epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw RejectedInput("epsilon bounds must lie in [0, 1]");
  }
}

double TrainConfig::epsilon(std::size_t episode) const {
  const std::size_t horizon =
      decay_episodes ? decay_episodes : std::max<std::size_t>(1, episodes * 4 / 5);
  const double frac = std::min(1.0, static_cast<double>(episode) / static_cast<double>(horizon));
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

LeaderQTable::Row LeaderQTable::row(const Observation& obs) const {
  if (auto it = rows_.find(obs); it != rows_.end()) return it->second;
  return Row{std::vector<double>(obs.actions.size(), 0.0),
             std::vector<std::uint64_t>(obs.actions.size(), 0)};
}

LeaderQTable::Row& LeaderQTable::touch(const Observation& obs) {
  auto [it, fresh] = rows_.try_emplace(obs);
  if (fresh) {
    it->second.q.assign(obs.actions.size(), 0.0);
    it->second.visits.assign(obs.actions.size(), 0);
  }
  return it->second;
}

double LeaderQTable::max_value(const Observation& obs) const {
  auto it = rows_.find(obs);
  if (it == rows_.end() || it->second.q.empty()) return 0.0;
  return *std::max_element(it->second.q.begin(), it->second.q.end());
}

ActionId LeaderQTable::greedy(const Observation& obs) const {
  if (obs.actions.empty()) throw RejectedInput("no actions at '" + obs.state_name + "'");
  auto it = rows_.find(obs);
  if (it == rows_.end()) return ActionId{0};
  const auto& q = it->second.q;
  return ActionId{static_cast<std::uint32_t>(std::max_element(q.begin(), q.end()) - q.begin())};
}

void LeaderQTable::update(const Observation& obs, ActionId a, double reward,
                          const Observation* next, double alpha, double gamma) {
  const double bootstrap = next ? max_value(*next) : 0.0;
  Row& r = touch(obs);
  if (a.value >= r.q.size()) throw RejectedInput("action index out of range in leader table");
  r.q[a.value] += alpha * (reward + gamma * bootstrap - r.q[a.value]);
  ++r.visits[a.value];
}

void LeaderQTable::set(const Observation& obs, ActionId a, double value, std::uint64_t visits) {
  Row& r = touch(obs);
  if (a.value >= r.q.size()) throw RejectedInput("action index out of range in leader table");
  r.q[a.value] = value;
  r.visits[a.value] = visits;
}

FollowerQTable::FollowerQTable(const IdgInstance& instance) {
  q_.resize(instance.state_count());
  visits_.resize(instance.state_count());
  for (std::uint32_t s = 0; s < instance.state_count(); ++s) {
    q_[s].assign(instance.actions(StateId{s}).size(), {0.0, 0.0});
    visits_[s].assign(instance.actions(StateId{s}).size(), {0, 0});
  }
}

namespace {
std::size_t slot(FollowerAction d) { return d == FollowerAction::Obey ? 0 : 1; }
}  // namespace

double FollowerQTable::value(StateId s, ActionId a, FollowerAction d) const {
  return q_.at(s.value).at(a.value)[slot(d)];
}

std::uint64_t FollowerQTable::visits(StateId s, ActionId a, FollowerAction d) const {
  return visits_.at(s.value).at(a.value)[slot(d)];
}

std::uint64_t FollowerQTable::pair_visits(StateId s, ActionId a) const {
  const auto& v = visits_.at(s.value).at(a.value);
  return v[0] + v[1];
}

double FollowerQTable::max_value(StateId s, ActionId a) const {
  const auto& q = q_.at(s.value).at(a.value);
  return std::max(q[0], q[1]);
}

FollowerAction FollowerQTable::greedy(StateId s, ActionId a) const {
  const auto& q = q_.at(s.value).at(a.value);
  return q[1] > q[0] ? FollowerAction::Disobey : FollowerAction::Obey;
}

void FollowerQTable::update(StateId s, ActionId a, FollowerAction d, double reward,
                            double next_value, double alpha, double gamma) {
  double& q = q_.at(s.value).at(a.value)[slot(d)];
  q += alpha * (reward + gamma * next_value - q);
  ++visits_[s.value][a.value][slot(d)];
}

void FollowerQTable::set(StateId s, ActionId a, FollowerAction d, double value,
                         std::uint64_t visits) {
  q_.at(s.value).at(a.value)[slot(d)] = value;
  visits_[s.value][a.value][slot(d)] = visits;
}

TrainResult train(const IdgInstance& instance, const TrainConfig& config) {
  config.validate();
  if (is_terminal(instance, instance.start())) {
    throw RejectedInput("cannot train from terminal start state '" +
                        instance.state_name(instance.start()) + "'");
  }
  const std::size_t max_steps = config.max_steps ? config.max_steps : default_max_steps(instance);
  TrainResult out{LeaderQTable{}, FollowerQTable(instance), {}};
  out.curve.reserve(config.episodes);
  Rng rng(config.seed);

  // The follower's next decision point is (s', a'_L), so its update waits
  // until the leader's next proposal is known.
  struct Pending {
    StateId s;
    ActionId a;
    FollowerAction d = FollowerAction::Obey;
    double reward = 0.0;
    StateId next;
  };

  for (std::size_t ep = 0; ep < config.episodes; ++ep) {
    const double eps = config.epsilon(ep);
    StateId s = instance.start();
    Observation obs = observe(instance, s);
    Pending pending;
    bool has_pending = false;
    EpisodeSummary summary;

    auto leader_pick = [&](const Observation& o) {
      if (rng.bernoulli(eps)) {
        return ActionId{static_cast<std::uint32_t>(rng.below(o.actions.size()))};
      }
      return out.leader.greedy(o);
    };

    std::size_t t = 0;
    for (; t < max_steps; ++t) {
      const ActionId a = leader_pick(obs);
      if (has_pending) {
        out.follower.update(pending.s, pending.a, pending.d, pending.reward,
                            out.follower.max_value(s, a), config.alpha, config.follower_gamma);
        has_pending = false;
      }
      const FollowerAction d = rng.bernoulli(eps)
                                   ? (rng.below(2) ? FollowerAction::Disobey : FollowerAction::Obey)
                                   : out.follower.greedy(s, a);
      const StepRecord rec = make_step(instance, t, s, a, d);
      const bool done = is_terminal(instance, rec.after);
      const Observation next_obs = observe(instance, rec.after);
      out.leader.update(obs, a, rec.leader_reward, done ? nullptr : &next_obs, config.alpha,
                        config.gamma);
      if (done) {
        out.follower.update(s, a, d, rec.follower_reward, 0.0, config.alpha, config.follower_gamma);
      } else {
        pending = Pending{s, a, d, static_cast<double>(rec.follower_reward), rec.after};
        has_pending = true;
      }
      summary.leader_return += rec.leader_reward;
      summary.follower_return += rec.follower_reward;
      s = rec.after;
      obs = next_obs;
      if (done) {
        summary.outcome = instance.state_class(s) == StateClass::Goal ? Outcome::Goal : Outcome::Harm;
        ++t;
        break;
      }
    }
    if (has_pending) {
      // Truncated episode: bootstrap through the leader's greedy proposal.
      const ActionId a = out.leader.greedy(obs);
      out.follower.update(pending.s, pending.a, pending.d, pending.reward,
                          out.follower.max_value(pending.next, a), config.alpha,
                          config.follower_gamma);
    }
    summary.steps = t;
    out.curve.push_back(summary);
  }
  return out;
}

namespace {

class GreedyLeader final : public LeaderPolicy {
 public:
  explicit GreedyLeader(LeaderQTable table) : table_(std::move(table)) {}
  std::string descriptor() const override { return "learned"; }
  Distribution propose(const LeaderBeliefState& belief) const override {
    return point_mass(table_.greedy(belief.observation));
  }

 private:
  LeaderQTable table_;
};

}  // namespace

LeaderPolicyPtr greedy_leader_policy(const LeaderQTable& table) {
  return std::make_shared<GreedyLeader>(table);
}

FollowerPolicy greedy_follower_policy(const IdgInstance& instance, const FollowerQTable& table) {
  if (table.state_count() != instance.state_count()) {
    throw RejectedInput("follower table does not match the instance");
  }
  FollowerPolicy p(instance, FollowerAction::Obey, "learned");
  for (std::uint32_t s = 0; s < instance.state_count(); ++s) {
    for (std::uint32_t a = 0; a < instance.actions(StateId{s}).size(); ++a) {
      p.set(StateId{s}, ActionId{a}, table.greedy(StateId{s}, ActionId{a}));
    }
  }
  return p;
}

Metrics evaluate(const IdgInstance& instance, const LeaderPolicy& leader,
                 const FollowerPolicy& follower, std::size_t episodes, std::size_t max_steps,
                 std::uint64_t seed) {
  if (episodes == 0) throw RejectedInput("episodes must be positive");
  if (max_steps == 0) max_steps = default_max_steps(instance);
  Metrics m;
  m.episodes = episodes;
  std::size_t goals = 0;
  std::size_t harms = 0;
  std::size_t budget = 0;
  long long leader_total = 0;
  long long follower_total = 0;
  std::size_t steps = 0;
  for (std::size_t i = 0; i < episodes; ++i) {
    const EpisodeLog log = run_episode(instance, leader, follower, max_steps, derive_seed(seed, i));
    switch (*log.outcome) {
      case Outcome::Goal:
        ++goals;
        break;
      case Outcome::Harm:
        ++harms;
        break;
      case Outcome::StepBudgetExhausted:
        ++budget;
        break;
    }
    leader_total += log.leader_return();
    follower_total += log.follower_return();
    steps += log.steps.size();
    for (const auto& r : log.steps) {
      const bool harmful =
          classify_action(instance, r.before, r.proposal) == ActionClass::Harmful;
      const bool vetoed = r.decision == FollowerAction::Disobey;
      m.harmful_proposals += harmful;
      m.disobeys += vetoed;
      m.harmful_disobeys += harmful && vetoed;
    }
  }
  const auto n = static_cast<double>(episodes);
  m.success_rate = static_cast<double>(goals) / n;
  m.harm_rate = static_cast<double>(harms) / n;
  m.budget_rate = static_cast<double>(budget) / n;
  m.avg_leader_return = static_cast<double>(leader_total) / n;
  m.avg_follower_return = static_cast<double>(follower_total) / n;
  m.avg_steps = static_cast<double>(steps) / n;
  if (m.disobeys) {
    m.veto_precision = static_cast<double>(m.harmful_disobeys) / static_cast<double>(m.disobeys);
  }
  if (m.harmful_proposals) {
    m.veto_recall =
        static_cast<double>(m.harmful_disobeys) / static_cast<double>(m.harmful_proposals);
  }
  return m;
}

std::string serialize_tables(const IdgInstance& instance, const LeaderQTable& leader,
                             const FollowerQTable& follower) {
  std::ostringstream out;
  out << "idg-qtables 1\n";
  out << "instance " << instance_fingerprint(instance) << '\n';
  std::size_t leader_rows = 0;
  for (const auto& [obs, row] : leader.rows()) leader_rows += row.q.size();
  out << "leader-rows " << leader_rows << '\n';
  for (const auto& [obs, row] : leader.rows()) {
    for (std::size_t a = 0; a < row.q.size(); ++a) {
      out << "L " << obs.state_name << ' ' << obs.actions[a].label << ' '
          << format_double(row.q[a]) << ' ' << row.visits[a] << '\n';
    }
  }
  std::size_t follower_rows = 0;
  for (std::uint32_t s = 0; s < follower.state_count(); ++s) {
    follower_rows += 2 * follower.action_count(StateId{s});
  }
  out << "follower-rows " << follower_rows << '\n';
  for (std::uint32_t s = 0; s < follower.state_count(); ++s) {
    const StateId id{s};
    for (std::uint32_t a = 0; a < follower.action_count(id); ++a) {
      for (FollowerAction d : {FollowerAction::Obey, FollowerAction::Disobey}) {
        out << "F " << instance.state_name(id) << ' ' << instance.action(id, ActionId{a}).label
            << ' ' << to_string(d) << ' ' << format_double(follower.value(id, ActionId{a}, d))
            << ' ' << follower.visits(id, ActionId{a}, d) << '\n';
      }
    }
  }
  return out.str();
}

LoadedTables parse_tables(const IdgInstance& instance, std::string_view text) {
  LoadedTables out{LeaderQTable{}, FollowerQTable(instance)};
  enum class Section { Version, Instance, LeaderCount, Leader, FollowerCount, Follower };
  Section section = Section::Version;
  std::size_t remaining = 0;

  auto state_of = [&](const detail::Token& t, std::size_t line) {
    auto id = instance.find_state(t.text);
    if (!id) throw ParseError(line, t.column, "unknown state '" + std::string(t.text) + "'");
    return *id;
  };
  auto action_of = [&](StateId s, const detail::Token& t, std::size_t line) {
    auto a = instance.find_action(s, t.text);
    if (!a) throw ParseError(line, t.column, "unknown action '" + std::string(t.text) + "'");
    return *a;
  };
  auto number = [&](const detail::Token& t, std::size_t line) {
    double v = 0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size()) {
      throw ParseError(line, t.column, "expected a number, got '" + std::string(t.text) + "'");
    }
    return v;
  };
  auto count = [&](const detail::Token& t, std::size_t line) {
    return static_cast<std::uint64_t>(detail::parse_int(t, line));
  };

  detail::for_each_line(text, [&](std::size_t line, const std::vector<detail::Token>& toks) {
    const std::string_view kw = toks[0].text;
    auto expect = [&](std::string_view want, std::size_t arity) {
      if (kw != want) {
        throw ParseError(line, toks[0].column,
                         "expected '" + std::string(want) + "', got '" + std::string(kw) + "'");
      }
      detail::expect_arity(toks, arity, line);
    };
    switch (section) {
      case Section::Version:
        expect("idg-qtables", 2);
        if (toks[1].text != "1") throw ParseError(line, toks[1].column, "unsupported version");
        section = Section::Instance;
        return;
      case Section::Instance:
        expect("instance", 2);
        if (toks[1].text != instance_fingerprint(instance)) {
          throw ParseError(line, toks[1].column, "tables were trained on a different instance");
        }
        section = Section::LeaderCount;
        return;
      case Section::LeaderCount:
        expect("leader-rows", 2);
        remaining = count(toks[1], line);
        section = remaining ? Section::Leader : Section::FollowerCount;
        return;
      case Section::Leader: {
        expect("L", 5);
        const StateId s = state_of(toks[1], line);
        out.leader.set(observe(instance, s), action_of(s, toks[2], line), number(toks[3], line),
                       count(toks[4], line));
        if (--remaining == 0) section = Section::FollowerCount;
        return;
      }
      case Section::FollowerCount:
        expect("follower-rows", 2);
        remaining = count(toks[1], line);
        section = Section::Follower;
        return;
      case Section::Follower: {
        if (remaining == 0) throw ParseError(line, toks[0].column, "more rows than declared");
        expect("F", 6);
        const StateId s = state_of(toks[1], line);
        const ActionId a = action_of(s, toks[2], line);
        FollowerAction d;
        if (toks[3].text == "obey") {
          d = FollowerAction::Obey;
        } else if (toks[3].text == "disobey") {
          d = FollowerAction::Disobey;
        } else {
          throw ParseError(line, toks[3].column, "decision must be obey or disobey");
        }
        out.follower.set(s, a, d, number(toks[4], line), count(toks[5], line));
        --remaining;
        return;
      }
    }
  });
  if (section != Section::Follower || remaining != 0) {
    throw ParseError(0, 0, "truncated table document");
  }
  return out;
}

std::string curves_csv(const std::vector<EpisodeSummary>& curve) {
  std::ostringstream out;
  out << "episode,leader_return,follower_return,outcome\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << i << ',' << curve[i].leader_return << ',' << curve[i].follower_return << ','
        << to_string(curve[i].outcome) << '\n';
  }
  return out.str();
}

}  // namespace idg
