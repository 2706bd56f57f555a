#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string_view>

#include <boost/rational.hpp>

namespace idg {

// Dense index into an instance's state table.
struct StateId {
  std::uint32_t value = 0;
  friend auto operator<=>(const StateId&, const StateId&) = default;
};

// Dense index into the action list of one particular state.
struct ActionId {
  std::uint32_t value = 0;
  friend auto operator<=>(const ActionId&, const ActionId&) = default;
};

enum class StateClass { Goal, Harmful, Other };
enum class ActionClass { GoalReaching, Harmful, Other };
enum class FollowerAction { Obey, Disobey };

using Rational = boost::rational<std::int64_t>;

std::string_view to_string(StateClass c);
std::string_view to_string(ActionClass c);
std::string_view to_string(FollowerAction a);

}  // namespace idg

template <>
struct std::hash<idg::StateId> {
  std::size_t operator()(idg::StateId s) const noexcept {
    return std::hash<std::uint32_t>{}(s.value);
  }
};
