#include "idg/instance.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "idg/error.hpp"
#include "text_util.hpp"

namespace idg {

std::string_view to_string(StateClass c) {
  switch (c) {
    case StateClass::Goal:
      return "goal";
    case StateClass::Harmful:
      return "harmful";
    case StateClass::Other:
      break;
  }
  return "other";
}

std::string_view to_string(ActionClass c) {
  switch (c) {
    case ActionClass::GoalReaching:
      return "goal-reaching";
    case ActionClass::Harmful:
      return "harmful";
    case ActionClass::Other:
      break;
  }
  return "other";
}

std::string_view to_string(FollowerAction a) {
  return a == FollowerAction::Obey ? "obey" : "disobey";
}

namespace {

bool is_token(std::string_view s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) || c == '#';
  });
}

}  // namespace

IdgInstance IdgInstance::build(std::vector<StateSpec> states, StateId start) {
  if (states.empty()) throw RejectedInput("instance has no states");
  if (start.value >= states.size()) {
    throw RejectedInput("start state index " + std::to_string(start.value) +
                        " out of range");
  }
  std::unordered_set<std::string_view> names;
  for (const auto& st : states) {
    if (!is_token(st.name)) {
      throw RejectedInput("state name '" + st.name +
                          "' must be a non-empty token without whitespace");
    }
    if (!names.insert(st.name).second) {
      throw RejectedInput("duplicate state name '" + st.name + "'");
    }
    if (st.kind == StateClass::Goal && !st.moves.empty()) {
      throw RejectedInput("goal state '" + st.name + "' is terminal and cannot carry actions");
    }
    if (st.kind == StateClass::Other && st.moves.empty()) {
      throw RejectedInput("non-terminal state '" + st.name + "' has no actions");
    }
    std::unordered_set<std::string_view> labels;
    for (const auto& m : st.moves) {
      if (!is_token(m.label)) {
        throw RejectedInput("action label '" + m.label + "' at state '" + st.name +
                            "' must be a non-empty token without whitespace");
      }
      if (!labels.insert(m.label).second) {
        throw RejectedInput("duplicate action '" + m.label + "' at state '" + st.name + "'");
      }
      if (m.target.value >= states.size()) {
        throw RejectedInput("action '" + m.label + "' at state '" + st.name +
                            "' has an out-of-range successor");
      }
    }
  }
  IdgInstance out;
  out.states_ = std::move(states);
  out.start_ = start;
  return out;
}

void IdgInstance::check_state(StateId s) const {
  if (s.value >= states_.size()) {
    throw RejectedInput("state index " + std::to_string(s.value) + " out of range (" +
                        std::to_string(states_.size()) + " states)");
  }
}

StateClass IdgInstance::state_class(StateId s) const {
  check_state(s);
  return states_[s.value].kind;
}

const std::string& IdgInstance::state_name(StateId s) const {
  check_state(s);
  return states_[s.value].name;
}

std::optional<StateId> IdgInstance::find_state(std::string_view name) const {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i].name == name) return StateId{static_cast<std::uint32_t>(i)};
  }
  return std::nullopt;
}

std::span<const Move> IdgInstance::actions(StateId s) const {
  check_state(s);
  const auto& st = states_[s.value];
  if (st.kind != StateClass::Other) return {};
  return st.moves;
}

std::span<const Move> IdgInstance::hidden_moves(StateId s) const {
  check_state(s);
  const auto& st = states_[s.value];
  if (st.kind != StateClass::Harmful) return {};
  return st.moves;
}

const Move& IdgInstance::action(StateId s, ActionId a) const {
  auto acts = actions(s);
  if (acts.empty()) {
    throw RejectedInput("state '" + states_[s.value].name + "' is terminal and has no actions");
  }
  if (a.value >= acts.size()) {
    throw RejectedInput("action index " + std::to_string(a.value) + " out of range at state '" +
                        states_[s.value].name + "'");
  }
  return acts[a.value];
}

StateId IdgInstance::successor(StateId s, ActionId a) const { return action(s, a).target; }

std::optional<ActionId> IdgInstance::find_action(StateId s, std::string_view label) const {
  auto acts = actions(s);
  for (std::size_t i = 0; i < acts.size(); ++i) {
    if (acts[i].label == label) return ActionId{static_cast<std::uint32_t>(i)};
  }
  return std::nullopt;
}

IdgInstance IdgInstance::masked() const {
  IdgInstance out = *this;
  for (auto& st : out.states_) {
    if (st.kind == StateClass::Harmful) st.kind = StateClass::Other;
  }
  return out;
}

IdgInstance parse_idg_document(std::string_view text) {
  std::vector<StateSpec> states;
  std::unordered_map<std::string, std::uint32_t> index;
  std::optional<StateId> start;
  bool header = false;
  std::size_t last_line = 0;

  auto lookup = [&](const detail::Token& tok, std::size_t line) {
    auto it = index.find(std::string(tok.text));
    if (it == index.end()) {
      throw ParseError(line, tok.column, "unknown state '" + std::string(tok.text) + "'");
    }
    return StateId{it->second};
  };

  detail::for_each_line(text, [&](std::size_t line, const std::vector<detail::Token>& toks) {
    last_line = line;
    const std::string_view kw = toks[0].text;
    if (!header) {
      if (kw != "idg" || toks.size() != 1) {
        throw ParseError(line, toks[0].column, "expected header 'idg'");
      }
      header = true;
      return;
    }
    if (kw == "state") {
      detail::expect_arity(toks, 3, line);
      StateSpec st;
      st.name = std::string(toks[1].text);
      const auto kind = toks[2].text;
      if (kind == "goal") {
        st.kind = StateClass::Goal;
      } else if (kind == "harmful") {
        st.kind = StateClass::Harmful;
      } else if (kind == "other") {
        st.kind = StateClass::Other;
      } else {
        throw ParseError(line, toks[2].column,
                         "state class must be goal, harmful or other, got '" +
                             std::string(kind) + "'");
      }
      if (index.contains(st.name)) {
        throw ParseError(line, toks[1].column, "duplicate state '" + st.name + "'");
      }
      index.emplace(st.name, static_cast<std::uint32_t>(states.size()));
      states.push_back(std::move(st));
    } else if (kw == "start") {
      detail::expect_arity(toks, 2, line);
      if (start) throw ParseError(line, toks[0].column, "duplicate start line");
      start = lookup(toks[1], line);
    } else if (kw == "action") {
      detail::expect_arity(toks, 4, line);
      const StateId from = lookup(toks[1], line);
      const StateId to = lookup(toks[3], line);
      states[from.value].moves.push_back(Move{std::string(toks[2].text), to});
    } else if (kw == "idg") {
      throw ParseError(line, toks[0].column, "duplicate header");
    } else {
      throw ParseError(line, toks[0].column, "unknown directive '" + std::string(kw) + "'");
    }
  });

  if (!header) throw ParseError(1, 0, "empty document");
  if (!start) throw ParseError(last_line, 0, "missing start line");
  return IdgInstance::build(std::move(states), *start);
}

std::string serialize_idg_document(const IdgInstance& instance) {
  std::ostringstream out;
  out << "idg\n";
  for (const auto& st : instance.states()) {
    out << "state " << st.name << ' ' << to_string(st.kind) << '\n';
  }
  out << "start " << instance.state_name(instance.start()) << '\n';
  for (const auto& st : instance.states()) {
    for (const auto& m : st.moves) {
      out << "action " << st.name << ' ' << m.label << ' ' << instance.state_name(m.target)
          << '\n';
    }
  }
  return out.str();
}

}  // namespace idg

namespace idg {

std::string instance_fingerprint(const IdgInstance& instance) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_idg_document(instance)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

}  // namespace idg
