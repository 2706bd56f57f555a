#include "idg/observation.hpp"

#include "idg/game.hpp"

namespace idg {

Observation observe(const IdgInstance& instance, StateId s) {
  Observation obs;
  obs.state = s;
  obs.state_name = instance.state_name(s);
  const auto acts = instance.actions(s);
  obs.actions.reserve(acts.size());
  for (std::uint32_t i = 0; i < acts.size(); ++i) {
    obs.actions.push_back(ObservedAction{
        acts[i].label,
        classify_action(instance, s, ActionId{i}) == ActionClass::GoalReaching});
  }
  return obs;
}

std::string Observation::render() const {
  std::string out = state_name + " [";
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += ' ';
    out += actions[i].label;
    out += actions[i].goal_reaching ? ":G" : ":-";
  }
  out += ']';
  return out;
}

}  // namespace idg
