#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "idg/game.hpp"
#include "idg/learn.hpp"
#include "idg/report.hpp"
#include "idg/service.hpp"
#include "idg/solver.hpp"

namespace idg::cli {
namespace {

enum class Format { Text, Json };

struct Globals {
  std::uint64_t seed = 0;
  std::string output;
  Format format = Format::Text;
};

std::string read_file(const std::string& path, std::istream& in) {
  if (path == "-") {
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << file.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot write '" + path + "'");
  file << content;
  if (!file) throw Error("failed writing '" + path + "'");
}

LoadedInstance load(const std::string& path, std::istream& in) {
  const std::string text = read_file(path, in);
  try {
    return load_instance_document(text);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), path + ": " + e.what());
  } catch (const Error& e) {
    throw RejectedInput(path + ": " + e.what());
  }
}

StateId pick_state(const IdgInstance& game, const std::string& name) {
  if (name.empty()) return game.start();
  const auto s = game.find_state(name);
  if (!s) throw RejectedInput("unknown state '" + name + "'");
  return *s;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---- solve ----------------------------------------------------------------

struct SolveArgs {
  std::string instance;
  std::size_t horizon = 1;
  std::string state;
};

std::string run_solve(const SolveArgs& a, const Globals& g, std::istream& in) {
  const LoadedInstance li = load(a.instance, in);
  const IdgInstance& game = li.game;
  const StateId root = pick_state(game, a.state);
  if (is_terminal(game, root)) {
    throw RejectedInput(a.instance + ": state '" + game.state_name(root) +
                        "' is terminal; there is no decision to solve");
  }
  if (a.horizon == 1) {
    const EquilibriumReport report = solve_1idg(game, root);
    return g.format == Format::Json ? dump(to_json(game, report)) : to_text(game, report);
  }
  const NIdgSolution sol = solve_n_idg(game, a.horizon);
  const VerificationGuard guard;
  // The value table is computed under the informed leader, so that is the
  // profile checked here. The masked replanning leader can gain by deviating
  // once the true labels are known.
  const StrategyProfile checked{informed_leader_policy(game), sol.profile.follower};
  std::optional<DeviationReport> verification;
  if (game.state_count() <= guard.max_states && a.horizon <= guard.max_horizon) {
    verification = verify_equilibrium(game, checked, a.horizon, root, guard);
  }
  if (g.format == Format::Json) {
    Json j = to_json(game, sol, root);
    if (verification) {
      j["verification"] = to_json(game, *verification);
      j["verification"]["leader"] = checked.leader->descriptor();
      j["verification"]["follower"] = checked.follower.descriptor();
    } else {
      j["verification"] = nullptr;
    }
    return dump(j);
  }
  std::string out = to_text(game, sol, root);
  if (verification) {
    out += "verified profile: " + checked.leader->descriptor() + " / " + checked.follower.descriptor() + "\n";
    out += to_text(game, *verification);
  } else {
    out += "verification skipped: instance exceeds the exhaustive-check guard\n";
  }
  return out;
}

// ---- traps ----------------------------------------------------------------

std::string run_traps(const std::string& path, const Globals& g, std::istream& in) {
  const LoadedInstance li = load(path, in);
  const TrapSet traps = detect_safety_traps(li.game);
  return g.format == Format::Json ? dump(to_json(li.game, traps)) : to_text(li.game, traps);
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string instance;
  TrainConfig config;
  std::string tables;
  std::string curves;
};

std::string run_train(TrainArgs a, const Globals& g, std::istream& in) {
  const LoadedInstance li = load(a.instance, in);
  a.config.seed = g.seed;
  const TrainResult result = train(li.game, a.config);
  write_file(a.tables, serialize_tables(li.game, result.leader, result.follower));
  if (!a.curves.empty()) write_file(a.curves, curves_csv(result.curve));

  // Summary over the last 10% of training episodes.
  const std::size_t window = std::max<std::size_t>(1, result.curve.size() / 10);
  double success = 0, harm = 0, lret = 0, fret = 0;
  for (std::size_t i = result.curve.size() - window; i < result.curve.size(); ++i) {
    const auto& e = result.curve[i];
    success += e.outcome == Outcome::Goal;
    harm += e.outcome == Outcome::Harm;
    lret += e.leader_return;
    fret += e.follower_return;
  }
  const double w = static_cast<double>(window);
  std::size_t visited = 0;
  for (std::uint32_t s = 0; s < result.follower.state_count(); ++s) {
    for (std::uint32_t act = 0; act < result.follower.action_count(StateId{s}); ++act) {
      visited += result.follower.pair_visits(StateId{s}, ActionId{act}) > 0;
    }
  }

  if (g.format == Format::Json) {
    return dump(Json{{"schema", "idg.train/1"},
                     {"instance", li.id},
                     {"config", to_json(a.config)},
                     {"leader_rows", result.leader.rows().size()},
                     {"follower_pairs_visited", visited},
                     {"final_window",
                      Json{{"episodes", window},
                           {"success_rate", success / w},
                           {"harm_rate", harm / w},
                           {"avg_leader_return", lret / w},
                           {"avg_follower_return", fret / w}}},
                     {"tables", a.tables},
                     {"curves", a.curves.empty() ? Json(nullptr) : Json(a.curves)}});
  }
  std::ostringstream out;
  out << "trained " << a.config.episodes << " episodes on " << li.id << " (seed " << g.seed
      << ")\n";
  out << "  leader rows: " << result.leader.rows().size()
      << ", follower pairs visited: " << visited << '\n';
  out << "  last " << window << " episodes: success " << success / w << ", harm " << harm / w
      << '\n';
  out << "  tables written to " << a.tables << '\n';
  if (!a.curves.empty()) out << "  curves written to " << a.curves << '\n';
  return out.str();
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string instance;
  std::string leader = "replanning";
  std::string follower = "optimal";
  std::string tables;
  std::size_t episodes = 1000;
  std::size_t max_steps = 0;
};

std::string run_eval(const EvalArgs& a, const Globals& g, std::istream& in) {
  const LoadedInstance li = load(a.instance, in);
  const IdgInstance& game = li.game;
  if (is_terminal(game, game.start())) {
    throw RejectedInput(a.instance + ": start state is terminal");
  }
  std::optional<LoadedTables> tables;
  auto need_tables = [&]() -> const LoadedTables& {
    if (!tables) {
      if (a.tables.empty()) throw RejectedInput("a learned policy needs --tables");
      try {
        tables = parse_tables(game, read_file(a.tables, in));
      } catch (const Error& e) {
        throw RejectedInput(a.tables + ": " + e.what());
      }
    }
    return *tables;
  };

  LeaderPolicyPtr leader;
  if (a.leader == "informed") leader = informed_leader_policy(game);
  else if (a.leader == "replanning") leader = leader_replanning_policy(game);
  else if (a.leader == "uniform") leader = uniform_leader_policy(game);
  else leader = greedy_leader_policy(need_tables().leader);

  std::optional<FollowerPolicy> follower;
  if (a.follower == "optimal") follower = follower_optimal_policy(game);
  else if (a.follower == "always-obey") follower = always_obey_policy(game);
  else follower = greedy_follower_policy(game, need_tables().follower);

  const std::size_t max_steps = a.max_steps ? a.max_steps : default_max_steps(game);
  const Metrics m = evaluate(game, *leader, *follower, a.episodes, max_steps, g.seed);
  if (g.format == Format::Json) {
    Json j = to_json(m);
    j["instance"] = li.id;
    j["leader"] = leader->descriptor();
    j["follower"] = follower->descriptor();
    j["seed"] = g.seed;
    return dump(j);
  }
  return "leader " + leader->descriptor() + ", follower " + follower->descriptor() + " on " +
         li.id + "\n" + to_text(m);
}

// ---- gen ------------------------------------------------------------------

struct GenArgs {
  int width = 5;
  int height = 5;
  double density = 0.2;
  bool require_safe_path = false;
  int max_attempts = 1000;
};

std::string run_gen(const GenArgs& a, const Globals& g) {
  const GridInstance grid =
      generate_random(a.width, a.height, a.density, a.require_safe_path, g.seed, a.max_attempts);
  const std::string doc = serialize_instance(grid);
  if (g.format == Format::Json) {
    return dump(Json{{"schema", "idg.instance/1"},
                     {"id", load_grid(grid).id},
                     {"document", doc}});
  }
  return doc;
}

// ---- play -----------------------------------------------------------------

struct PlayArgs {
  std::string instance;
  std::string follower = "optimal";
  std::string tables;
  bool feedback = false;
  std::size_t max_steps = 0;
};

// Renders strictly from the service's masked view.
std::string render_view(const Json& view) {
  std::ostringstream out;
  if (view.value("kind", "") == "grid") {
    const int w = view["width"], h = view["height"];
    std::vector<std::string> rows(static_cast<std::size_t>(h), std::string(static_cast<std::size_t>(w), '.'));
    auto put = [&](const Json& c, char ch) {
      rows[c["y"].get<std::size_t>()][c["x"].get<std::size_t>()] = ch;
    };
    put(view["start"], 'S');
    for (const auto& c : view["goals"]) put(c, 'G');
    put(view["position"], '@');
    for (const auto& r : rows) out << "  " << r << '\n';
  }
  out << "at " << view["state"].get<std::string>() << "; moves:";
  for (const auto& a : view["available"]) {
    out << ' ' << a.get<std::string>();
    for (const auto& gact : view["goal_actions"]) {
      if (gact == a) out << "(goal)";
    }
  }
  out << '\n';
  return out.str();
}

std::string run_play(const PlayArgs& a, const Globals& g, std::istream& in, std::ostream& live) {
  const LoadedInstance li = load(a.instance, in);
  SessionService service(g.seed);
  const std::string iid = service.create_instance(li.canonical)["id"];
  Json req{{"instance", iid}, {"follower", a.follower}, {"feedback", a.feedback}, {"seed", g.seed}};
  if (a.max_steps) req["max_steps"] = a.max_steps;
  if (!a.tables.empty()) req["tables"] = read_file(a.tables, in);

  Json session;
  try {
    session = service.create_session(req);
  } catch (const ServiceError& e) {
    throw RejectedInput(a.instance + ": " + e.what());
  }
  const std::string sid = session["session"];
  const bool text = g.format == Format::Text;
  Json turns = Json::array();
  if (text) {
    live << "session " << sid << " (follower " << a.follower << ", feedback "
         << (a.feedback ? "on" : "off") << ")\n"
         << render_view(session["observation"]) << "> " << std::flush;
  }

  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string cmd;
    if (!(words >> cmd)) {
      if (text) live << "> " << std::flush;
      continue;
    }
    if (cmd == "quit" || cmd == "q") break;
    Json resp;
    try {
      resp = service.propose(sid, Json{{"action", cmd}});
    } catch (const ServiceError& e) {
      if (text) {
        live << e.what();
        if (e.details().contains("available")) live << " (available: " << e.details()["available"].dump() << ")";
        live << "\n> " << std::flush;
      } else {
        turns.push_back(e.body());
      }
      continue;
    }
    turns.push_back(resp);
    if (text) {
      live << "follower: " << resp["decision"].get<std::string>();
      if (resp.contains("feedback")) live << " (reason: " << resp["feedback"]["reason"].get<std::string>() << ")";
      live << "; reward " << resp["reward"] << '\n';
    }
    if (resp["status"] == "finished") {
      if (text) live << "finished: " << resp["outcome"].get<std::string>() << '\n';
      break;
    }
    if (text) live << render_view(resp["observation"]) << "> " << std::flush;
  }

  const Json log = service.log(sid);
  const bool finished = log["status"] == "finished";
  if (text) {
    live << '\n';
    if (finished) return log["log"].get<std::string>();
    return "session left unfinished after " + std::to_string(log["steps"].get<std::size_t>()) + " turn(s)\n";
  }
  return dump(Json{{"schema", "idg.play/1"},
                   {"session", sid},
                   {"turns", turns},
                   {"status", log["status"]},
                   {"log", finished ? log["log"] : Json(nullptr)}});
}

// ---- serve ----------------------------------------------------------------

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string log_dir;
};

int run_serve(const ServeArgs& a, const Globals& g, std::ostream& out) {
  std::optional<std::filesystem::path> dir;
  if (!a.log_dir.empty()) dir = a.log_dir;
  SessionService service(g.seed, dir);
  HttpServer server(service);
  out << "serving on http://" << a.host << ':' << a.port << std::endl;
  if (!server.listen(a.host, a.port)) {
    throw Error("cannot listen on " + a.host + ":" + std::to_string(a.port));
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Intelligent disobedience game toolkit", "idg"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Globals g;
  if (const char* env = std::getenv("IDG_SEED")) {
    try {
      g.seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "idg: IDG_SEED must be a non-negative integer, got '" << env << "'\n";
      return 2;
    }
  }
  std::string format = "text";
  app.add_option("--seed", g.seed, "Random seed (default: $IDG_SEED or 0)");
  app.add_option("-o,--output", g.output, "Write output to this file instead of stdout");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve the game at a state");
  solve_cmd->add_option("instance", solve.instance, "Instance document ('-' for stdin)")->required();
  solve_cmd->add_option("--horizon", solve.horizon, "Number of rounds")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--state", solve.state, "State to solve at (default: start)");

  std::string traps_instance;
  auto* traps_cmd = app.add_subcommand("traps", "List safety traps with certificates");
  traps_cmd->add_option("instance", traps_instance, "Instance document")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train leader and follower Q-tables");
  train_cmd->add_option("instance", tr.instance, "Instance document")->required();
  train_cmd->add_option("--episodes", tr.config.episodes, "Training episodes");
  train_cmd->add_option("--max-steps", tr.config.max_steps, "Step budget per episode (0: 10|S|)");
  train_cmd->add_option("--alpha", tr.config.alpha, "Learning rate");
  train_cmd->add_option("--gamma", tr.config.gamma, "Leader discount");
  train_cmd->add_option("--follower-gamma", tr.config.follower_gamma, "Follower discount");
  train_cmd->add_option("--epsilon-start", tr.config.epsilon_start, "Initial exploration rate");
  train_cmd->add_option("--epsilon-end", tr.config.epsilon_end, "Final exploration rate");
  train_cmd->add_option("--decay-episodes", tr.config.decay_episodes,
                        "Episodes over which epsilon decays (0: 80% of episodes)");
  train_cmd->add_option("--out", tr.tables, "Q-table output file")->required();
  train_cmd->add_option("--curves", tr.curves, "Learning-curve CSV output file");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a leader/follower pairing");
  eval_cmd->add_option("instance", ev.instance, "Instance document")->required();
  eval_cmd->add_option("--leader", ev.leader, "Leader policy")
      ->check(CLI::IsMember({"informed", "replanning", "uniform", "learned"}));
  eval_cmd->add_option("--follower", ev.follower, "Follower policy")
      ->check(CLI::IsMember({"optimal", "always-obey", "learned"}));
  eval_cmd->add_option("--tables", ev.tables, "Q-tables for learned policies");
  eval_cmd->add_option("--episodes", ev.episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--max-steps", ev.max_steps, "Step budget per episode (0: 10|S|)");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random grid instance");
  gen_cmd->add_option("--width", gen.width, "Grid width")->required();
  gen_cmd->add_option("--height", gen.height, "Grid height")->required();
  gen_cmd->add_option("--density", gen.density, "Lava density")->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_flag("--require-safe-path", gen.require_safe_path, "Resample until the goal is safely reachable");
  gen_cmd->add_option("--max-attempts", gen.max_attempts, "Rejection-sampling budget")
      ->check(CLI::PositiveNumber);

  PlayArgs play;
  auto* play_cmd = app.add_subcommand("play", "Play as the leader in the terminal");
  play_cmd->add_option("instance", play.instance, "Instance document")->required();
  play_cmd->add_option("--follower", play.follower, "Follower kind")
      ->check(CLI::IsMember({"optimal", "always-obey", "learned"}));
  play_cmd->add_option("--tables", play.tables, "Q-tables for a learned follower");
  play_cmd->add_flag("--feedback", play.feedback, "Explain vetoes");
  play_cmd->add_option("--max-steps", play.max_steps, "Step budget (0: 10|S|)");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP session service");
  serve_cmd->add_option("--port", serve.port, "TCP port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--log-dir", serve.log_dir, "Directory for persisted episode logs");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  g.format = format == "json" ? Format::Json : Format::Text;

  try {
    std::string result;
    if (*solve_cmd) result = run_solve(solve, g, in);
    else if (*traps_cmd) result = run_traps(traps_instance, g, in);
    else if (*train_cmd) result = run_train(tr, g, in);
    else if (*eval_cmd) result = run_eval(ev, g, in);
    else if (*gen_cmd) result = run_gen(gen, g);
    else if (*play_cmd) result = run_play(play, g, in, out);
    else return run_serve(serve, g, out);

    if (g.output.empty()) {
      out << result << std::flush;
    } else {
      write_file(g.output, result);
    }
    return 0;
  } catch (const std::exception& e) {
    err << "idg: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace idg::cli
