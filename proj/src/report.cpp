#include "idg/report.hpp"

#include <sstream>

#include "idg/game.hpp"

namespace idg {

std::string rational_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

namespace {

Json pair_json(const PayoffPair& p) {
  return Json{{"leader", rational_string(p.leader)}, {"follower", rational_string(p.follower)}};
}

Json coord_json(Coord c) { return Json{{"x", c.x}, {"y", c.y}}; }

Json deviations_json(const IdgInstance& instance, const std::vector<Deviation>& devs) {
  Json out = Json::array();
  for (const auto& d : devs) {
    out.push_back(Json{{"player", to_string(d.player)},
                       {"at", d.at},
                       {"state", instance.state_name(d.state)},
                       {"steps_remaining", d.steps_remaining},
                       {"deviation", d.description},
                       {"delta", rational_string(d.delta)}});
  }
  return out;
}

Json distribution_json(const IdgInstance& instance, StateId s, const Distribution& d) {
  Json out = Json::array();
  for (const auto& p : d) {
    out.push_back(Json{{"action", instance.action(s, p.action).label},
                       {"probability", rational_string(p.probability)}});
  }
  return out;
}

std::string distribution_text(const IdgInstance& instance, StateId s, const Distribution& d) {
  std::string out = "{";
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) out += ", ";
    out += instance.action(s, d[i].action).label + ": " + rational_string(d[i].probability);
  }
  return out + "}";
}

std::string pair_text(const PayoffPair& p) {
  return "(" + rational_string(p.leader) + ", " + rational_string(p.follower) + ")";
}

}  // namespace

Json to_json(const IdgInstance& instance, const EquilibriumReport& report) {
  const StateId s = report.state;
  Json follower = Json::array();
  const auto acts = instance.actions(s);
  for (std::uint32_t a = 0; a < acts.size(); ++a) {
    follower.push_back(Json{{"action", acts[a].label},
                            {"class", to_string(classify_action(instance, s, ActionId{a}))},
                            {"decision", to_string(report.follower.decide(s, ActionId{a}))}});
  }
  bool certified = true;
  for (const auto& d : report.deviations) certified &= d.delta <= Rational(0);
  return Json{{"schema", "idg.equilibrium/1"},
              {"state", instance.state_name(s)},
              {"case", to_string(report.tag)},
              {"leader", distribution_json(instance, s, report.leader)},
              {"follower", follower},
              {"payoff", pair_json(report.payoff)},
              {"certified", certified},
              {"deviations", deviations_json(instance, report.deviations)}};
}

Json to_json(const IdgInstance& instance, const NIdgSolution& solution, StateId root) {
  Json values = Json::array();
  for (std::uint32_t s = 0; s < instance.state_count(); ++s) {
    Json row = Json::array();
    for (std::size_t k = 0; k <= solution.horizon; ++k) {
      row.push_back(pair_json(solution.value(StateId{s}, k)));
    }
    values.push_back(Json{{"state", instance.state_name(StateId{s})}, {"values", row}});
  }
  return Json{{"schema", "idg.nidg/1"},
              {"horizon", solution.horizon},
              {"root", instance.state_name(root)},
              {"root_value", pair_json(solution.value(root, solution.horizon))},
              {"leader_policy", solution.profile.leader->descriptor()},
              {"follower_policy", solution.profile.follower.descriptor()},
              {"values", values}};
}

Json to_json(const IdgInstance& instance, const DeviationReport& report) {
  return Json{{"schema", "idg.verification/1"},
              {"certified", report.certified},
              {"value", pair_json(report.value)},
              {"decision_points", report.decision_points},
              {"deviations", deviations_json(instance, report.deviations)}};
}

Json to_json(const IdgInstance& instance, const TrapSet& traps) {
  Json members = Json::array();
  for (const auto& c : traps.certificates) {
    Json witnesses = Json::array();
    for (const auto& [a, t] : c.witnesses) {
      witnesses.push_back(Json{{"action", instance.action(c.state, a).label},
                               {"successor", instance.state_name(t)}});
    }
    members.push_back(Json{{"state", instance.state_name(c.state)},
                           {"no_goal_action", c.no_goal_action},
                           {"witnesses", witnesses}});
  }
  return Json{{"schema", "idg.traps/1"}, {"count", traps.members.size()}, {"members", members}};
}

Json to_json(const Metrics& m) {
  return Json{{"schema", "idg.metrics/1"},
              {"episodes", m.episodes},
              {"success_rate", m.success_rate},
              {"harm_rate", m.harm_rate},
              {"budget_rate", m.budget_rate},
              {"avg_leader_return", m.avg_leader_return},
              {"avg_follower_return", m.avg_follower_return},
              {"avg_steps", m.avg_steps},
              {"veto_precision", m.veto_precision},
              {"veto_recall", m.veto_recall},
              {"disobeys", m.disobeys},
              {"harmful_proposals", m.harmful_proposals},
              {"harmful_disobeys", m.harmful_disobeys}};
}

Json to_json(const TrainConfig& c) {
  return Json{{"episodes", c.episodes},         {"max_steps", c.max_steps},
              {"alpha", c.alpha},               {"gamma", c.gamma},
              {"follower_gamma", c.follower_gamma},
              {"epsilon_start", c.epsilon_start}, {"epsilon_end", c.epsilon_end},
              {"decay_episodes", c.decay_episodes}, {"seed", c.seed}};
}

Json masked_view(const LoadedInstance& loaded, StateId s) {
  const Observation obs = observe(loaded.game, s);
  Json available = Json::array();
  Json goal_actions = Json::array();
  for (const auto& a : obs.actions) {
    available.push_back(a.label);
    if (a.goal_reaching) goal_actions.push_back(a.label);
  }
  Json view{{"state", obs.state_name}, {"available", available}, {"goal_actions", goal_actions}};
  if (loaded.grid) {
    const GridInstance& g = *loaded.grid;
    Json goals = Json::array();
    for (Coord c : g.goals) goals.push_back(coord_json(c));
    view["kind"] = "grid";
    view["width"] = g.width;
    view["height"] = g.height;
    view["start"] = coord_json(g.start);
    view["goals"] = goals;
    view["position"] = coord_json(state_tile(g, s));
  } else {
    view["kind"] = "graph";
  }
  return view;
}

std::string to_text(const IdgInstance& instance, const EquilibriumReport& report) {
  std::ostringstream out;
  const StateId s = report.state;
  out << "one-step equilibrium at " << instance.state_name(s) << " (" << to_string(report.tag)
      << ")\n";
  out << "  leader:   " << distribution_text(instance, s, report.leader) << '\n';
  out << "  follower:";
  const auto acts = instance.actions(s);
  for (std::uint32_t a = 0; a < acts.size(); ++a) {
    out << ' ' << acts[a].label << '=' << to_string(report.follower.decide(s, ActionId{a}));
  }
  out << "\n  payoff:   " << pair_text(report.payoff) << '\n';
  out << "  deviations:\n";
  for (const auto& d : report.deviations) {
    out << "    " << to_string(d.player) << ' ' << d.description << ": "
        << rational_string(d.delta) << '\n';
  }
  return out.str();
}

std::string to_text(const IdgInstance& instance, const NIdgSolution& solution, StateId root) {
  std::ostringstream out;
  out << "backward induction, horizon " << solution.horizon << ", root "
      << instance.state_name(root) << '\n';
  out << "  value at root: " << pair_text(solution.value(root, solution.horizon)) << '\n';
  out << "  profile: leader=" << solution.profile.leader->descriptor()
      << " follower=" << solution.profile.follower.descriptor() << '\n';
  for (std::uint32_t s = 0; s < instance.state_count(); ++s) {
    out << "  " << instance.state_name(StateId{s}) << ':';
    for (std::size_t k = 1; k <= solution.horizon; ++k) {
      out << ' ' << pair_text(solution.value(StateId{s}, k));
    }
    out << '\n';
  }
  return out.str();
}

std::string to_text(const IdgInstance& instance, const DeviationReport& report) {
  std::ostringstream out;
  out << "verification: " << (report.certified ? "certified" : "NOT certified") << ", value "
      << pair_text(report.value) << ", " << report.decision_points << " decision points\n";
  for (const auto& d : report.deviations) {
    if (d.delta > Rational(0)) {
      out << "  profitable " << to_string(d.player) << " deviation at [" << d.at << "] "
          << d.description << ": +" << rational_string(d.delta) << '\n';
    }
  }
  (void)instance;
  return out.str();
}

std::string to_text(const IdgInstance& instance, const TrapSet& traps) {
  std::ostringstream out;
  out << "safety trap: " << traps.members.size() << " state(s)\n";
  for (const auto& c : traps.certificates) {
    out << "  " << instance.state_name(c.state) << "  no goal action";
    for (const auto& [a, t] : c.witnesses) {
      out << "; " << instance.action(c.state, a).label << " -> " << instance.state_name(t);
    }
    out << '\n';
  }
  return out.str();
}

std::string to_text(const Metrics& m) {
  std::ostringstream out;
  out << "episodes            " << m.episodes << '\n'
      << "success_rate        " << m.success_rate << '\n'
      << "harm_rate           " << m.harm_rate << '\n'
      << "budget_rate         " << m.budget_rate << '\n'
      << "avg_leader_return   " << m.avg_leader_return << '\n'
      << "avg_follower_return " << m.avg_follower_return << '\n'
      << "avg_steps           " << m.avg_steps << '\n'
      << "veto_precision      " << m.veto_precision << '\n'
      << "veto_recall         " << m.veto_recall << '\n';
  return out.str();
}

}  // namespace idg
