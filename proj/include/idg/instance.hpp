#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idg/types.hpp"

namespace idg {

struct Move {
  std::string label;
  StateId target;

  friend bool operator==(const Move&, const Move&) = default;
};

// Raw description of one state handed to IdgInstance::build.
//
// For Other states `moves` are the leader's actions. Harmful states are
// terminal; their `moves` are the leader's *believed* moves out of the tile
// (what the leader would expect if the tile were safe) and are never
// playable. Goal states must carry no moves.
struct StateSpec {
  std::string name;
  StateClass kind = StateClass::Other;
  std::vector<Move> moves;

  friend bool operator==(const StateSpec&, const StateSpec&) = default;
};

// A validated, immutable finite Intelligent Disobedience Game.
class IdgInstance {
 public:
  // Throws RejectedInput naming the violated invariant.
  static IdgInstance build(std::vector<StateSpec> states, StateId start);

  std::size_t state_count() const { return states_.size(); }
  StateId start() const { return start_; }

  StateClass state_class(StateId s) const;
  const std::string& state_name(StateId s) const;
  std::optional<StateId> find_state(std::string_view name) const;

  // The leader's action set A_L(s); empty for terminal states.
  std::span<const Move> actions(StateId s) const;
  // Believed-but-unplayable moves of a Harmful state; empty otherwise.
  std::span<const Move> hidden_moves(StateId s) const;

  const Move& action(StateId s, ActionId a) const;
  StateId successor(StateId s, ActionId a) const;
  std::optional<ActionId> find_action(StateId s, std::string_view label) const;

  // The leader's view of the world: every Harmful state relabelled Other,
  // with its believed moves made playable.
  IdgInstance masked() const;

  const std::vector<StateSpec>& states() const { return states_; }

  friend bool operator==(const IdgInstance&, const IdgInstance&) = default;

 private:
  IdgInstance() = default;
  void check_state(StateId s) const;

  std::vector<StateSpec> states_;
  StateId start_;
};

// Line-oriented document for arbitrary instances:
//
//   idg
//   state <name> <goal|harmful|other>
//   start <name>
//   action <from> <label> <to>
//
// `#` starts a comment. States must be declared before use. Action lines out
// of a harmful state declare the leader's believed moves.
IdgInstance parse_idg_document(std::string_view text);
std::string serialize_idg_document(const IdgInstance& instance);

}  // namespace idg

namespace idg {

// Stable content identifier: 16 hex digits of FNV-1a over the canonical
// idg document.
std::string instance_fingerprint(const IdgInstance& instance);

}  // namespace idg
