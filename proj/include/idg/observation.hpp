#pragma once

#include <compare>
#include <string>
#include <vector>

#include "idg/instance.hpp"

namespace idg {

struct ObservedAction {
  std::string label;
  bool goal_reaching = false;

  friend auto operator<=>(const ObservedAction&, const ObservedAction&) = default;
};

// What the leader sees at a state: its identity and, per action, only
// whether the action reaches a goal. Harmful and Other are indistinguishable.
struct Observation {
  StateId state;
  std::string state_name;
  std::vector<ObservedAction> actions;

  // Canonical single-line rendering, e.g. "(1,2) [up:- right:G down:- left:-]".
  std::string render() const;

  friend auto operator<=>(const Observation&, const Observation&) = default;
};

Observation observe(const IdgInstance& instance, StateId s);

}  // namespace idg
