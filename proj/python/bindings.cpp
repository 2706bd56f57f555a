#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "idg/error.hpp"
#include "idg/game.hpp"
#include "idg/learn.hpp"
#include "idg/report.hpp"
#include "idg/solver.hpp"

namespace py = pybind11;

namespace {

// Structured results cross the boundary as JSON text; the Python package
// decodes them.
std::string solve_json(const std::string& document, const std::string& state, std::size_t horizon) {
  const auto li = idg::load_instance_document(document);
  idg::StateId s = li.game.start();
  if (!state.empty()) {
    const auto found = li.game.find_state(state);
    if (!found) throw idg::RejectedInput("unknown state '" + state + "'");
    s = *found;
  }
  if (horizon <= 1) return idg::to_json(li.game, idg::solve_1idg(li.game, s)).dump();
  return idg::to_json(li.game, idg::solve_n_idg(li.game, horizon), s).dump();
}

std::string traps_json(const std::string& document) {
  const auto li = idg::load_instance_document(document);
  return idg::to_json(li.game, idg::detect_safety_traps(li.game)).dump();
}

std::string evaluate_json(const std::string& document, const std::string& leader_kind,
                          const std::string& follower_kind, std::size_t episodes,
                          std::uint64_t seed) {
  const auto li = idg::load_instance_document(document);
  const auto& g = li.game;
  idg::LeaderPolicyPtr leader;
  if (leader_kind == "informed") leader = idg::informed_leader_policy(g);
  else if (leader_kind == "replanning") leader = idg::leader_replanning_policy(g);
  else if (leader_kind == "uniform") leader = idg::uniform_leader_policy(g);
  else throw idg::RejectedInput("unknown leader kind '" + leader_kind + "'");
  const idg::FollowerPolicy follower = [&] {
    if (follower_kind == "optimal") return idg::follower_optimal_policy(g);
    if (follower_kind == "always-obey") return idg::always_obey_policy(g);
    throw idg::RejectedInput("unknown follower kind '" + follower_kind + "'");
  }();
  return idg::to_json(idg::evaluate(g, *leader, follower, episodes, idg::default_max_steps(g), seed))
      .dump();
}

py::tuple payoff(const std::string& action_class, const std::string& decision) {
  idg::ActionClass c;
  if (action_class == "goal-reaching") c = idg::ActionClass::GoalReaching;
  else if (action_class == "harmful") c = idg::ActionClass::Harmful;
  else if (action_class == "other") c = idg::ActionClass::Other;
  else throw idg::RejectedInput("unknown action class '" + action_class + "'");
  idg::FollowerAction d;
  if (decision == "obey") d = idg::FollowerAction::Obey;
  else if (decision == "disobey") d = idg::FollowerAction::Disobey;
  else throw idg::RejectedInput("unknown decision '" + decision + "'");
  const auto p = idg::step_payoff(c, d);
  return py::make_tuple(p.leader, p.follower);
}

}  // namespace

PYBIND11_MODULE(_idg, m) {
  m.doc() = "Intelligent disobedience game engine";
  py::register_exception<idg::Error>(m, "IdgError", PyExc_ValueError);

  m.def("canonical", [](const std::string& doc) { return idg::load_instance_document(doc).canonical; },
        py::arg("document"));
  m.def("instance_id", [](const std::string& doc) { return idg::load_instance_document(doc).id; },
        py::arg("document"));
  m.def("state_names", [](const std::string& doc) {
    const auto li = idg::load_instance_document(doc);
    std::vector<std::string> names;
    for (std::uint32_t s = 0; s < li.game.state_count(); ++s) names.push_back(li.game.state_name(idg::StateId{s}));
    return names;
  }, py::arg("document"));
  m.def("step_payoff", &payoff, py::arg("action_class"), py::arg("decision"));
  m.def("solve_json", &solve_json, py::arg("document"), py::arg("state") = "", py::arg("horizon") = 1);
  m.def("traps_json", &traps_json, py::arg("document"));
  m.def("evaluate_json", &evaluate_json, py::arg("document"), py::arg("leader"), py::arg("follower"),
        py::arg("episodes") = 1000, py::arg("seed") = 0);
  m.def("generate", [](int w, int h, double density, bool safe, std::uint64_t seed) {
    return idg::serialize_instance(idg::generate_random(w, h, density, safe, seed));
  }, py::arg("width"), py::arg("height"), py::arg("density"), py::arg("require_safe_path"), py::arg("seed"));
}
