#pragma once

// JSON and plain-text renderings of solver, learning, and episode results.
// Every JSON document carries a "schema" field, "idg.<kind>/1".

#include <string>

#include <json.hpp>

#include "idg/episode.hpp"
#include "idg/gridworld.hpp"
#include "idg/learn.hpp"
#include "idg/solver.hpp"

namespace idg {

using Json = nlohmann::ordered_json;

std::string rational_string(const Rational& r);

Json to_json(const IdgInstance& instance, const EquilibriumReport& report);
Json to_json(const IdgInstance& instance, const NIdgSolution& solution, StateId root);
Json to_json(const IdgInstance& instance, const DeviationReport& report);
Json to_json(const IdgInstance& instance, const TrapSet& traps);
Json to_json(const Metrics& metrics);
Json to_json(const TrainConfig& config);

// The leader's view at `s`: position, available actions and goal flags, and
// for grid instances the board without lava.
Json masked_view(const LoadedInstance& loaded, StateId s);

std::string to_text(const IdgInstance& instance, const EquilibriumReport& report);
std::string to_text(const IdgInstance& instance, const NIdgSolution& solution, StateId root);
std::string to_text(const IdgInstance& instance, const DeviationReport& report);
std::string to_text(const IdgInstance& instance, const TrapSet& traps);
std::string to_text(const Metrics& metrics);

}  // namespace idg
