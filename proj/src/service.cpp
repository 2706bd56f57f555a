#include "idg/service.hpp"

#include <fstream>
#include <thread>

#include <httplib.h>

#include "idg/game.hpp"
#include "idg/learn.hpp"
#include "idg/rng.hpp"

namespace idg {

Json ServiceError::body() const {
  return Json{{"code", code_}, {"message", what()}, {"details", details_}};
}

namespace {

ServiceError not_found(const std::string& what, const std::string& id) {
  return ServiceError(404, "not-found", what + " '" + id + "' not found", Json{{"id", id}});
}

ServiceError bad_request(const std::string& code, const std::string& message,
                         Json details = Json::object()) {
  return ServiceError(400, code, message, std::move(details));
}

std::string hex_token(std::uint64_t v) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kHex[v & 0xf];
  return out;
}

}  // namespace

struct SessionService::Session {
  explicit Session(FollowerPolicy f) : follower(std::move(f)) {}

  std::string id;
  std::shared_ptr<const LoadedInstance> instance;
  FollowerKind kind = FollowerKind::Optimal;
  FollowerPolicy follower;
  bool feedback = false;
  std::size_t max_steps = 0;
  StateId state;
  EpisodeLog log;
  std::size_t persisted = 0;  // bytes of the log file already written
  // Held for the duration of one turn; a second concurrent proposal fails
  // to acquire it and gets a conflict.
  mutable std::mutex turn;

  bool finished() const { return log.outcome.has_value(); }

  Json status_json() const {
    Json j{{"status", finished() ? "finished" : "active"}};
    if (finished()) j["outcome"] = to_string(*log.outcome);
    return j;
  }
};

SessionService::SessionService(std::uint64_t seed, std::optional<std::filesystem::path> log_dir)
    : seed_(seed), log_dir_(std::move(log_dir)) {
  if (log_dir_) std::filesystem::create_directories(*log_dir_);
}

SessionService::~SessionService() = default;

Json SessionService::create_instance(std::string_view document) {
  LoadedInstance loaded = [&] {
    try {
      return load_instance_document(document);
    } catch (const ParseError& e) {
      throw bad_request("invalid-document", e.what(),
                        Json{{"line", e.line()}, {"column", e.column()}});
    } catch (const RejectedInput& e) {
      throw bad_request("invalid-instance", e.what());
    }
  }();
  const std::string id = loaded.id;
  std::unique_lock lock(mutex_);
  instances_.try_emplace(id, std::make_shared<const LoadedInstance>(std::move(loaded)));
  return Json{{"id", id}};
}

std::shared_ptr<const LoadedInstance> SessionService::find_instance(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = instances_.find(id);
  if (it == instances_.end()) throw not_found("instance", id);
  return it->second;
}

std::shared_ptr<SessionService::Session> SessionService::find_session(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw not_found("session", id);
  return it->second;
}

Json SessionService::get_instance(const std::string& id) const {
  const auto inst = find_instance(id);
  return Json{{"id", id}, {"kind", inst->grid ? "grid" : "graph"}, {"document", inst->canonical}};
}

Json SessionService::create_session(const Json& body) {
  if (!body.is_object()) throw bad_request("invalid-body", "session request must be a JSON object");
  if (!body.contains("instance") || !body["instance"].is_string()) {
    throw bad_request("invalid-body", "field 'instance' (string) is required");
  }
  const auto inst = find_instance(body["instance"].get<std::string>());
  const IdgInstance& game = inst->game;
  if (is_terminal(game, game.start())) {
    throw bad_request("terminal-start", "instance starts in a terminal state");
  }

  const std::string kind_name = body.value("follower", std::string("optimal"));
  FollowerKind kind;
  std::optional<FollowerPolicy> follower;
  if (kind_name == "optimal") {
    kind = FollowerKind::Optimal;
    follower = follower_optimal_policy(game);
  } else if (kind_name == "always-obey") {
    kind = FollowerKind::AlwaysObey;
    follower = always_obey_policy(game);
  } else if (kind_name == "learned") {
    kind = FollowerKind::Learned;
    if (!body.contains("tables") || !body["tables"].is_string()) {
      throw bad_request("missing-table", "follower 'learned' needs a trained table in 'tables'");
    }
    try {
      const auto tables = parse_tables(game, body["tables"].get<std::string>());
      follower = greedy_follower_policy(game, tables.follower);
    } catch (const RejectedInput& e) {
      throw bad_request("invalid-table", e.what());
    }
  } else {
    throw bad_request("invalid-follower", "unknown follower kind '" + kind_name + "'",
                      Json{{"allowed", {"optimal", "learned", "always-obey"}}});
  }

  auto session = std::make_shared<Session>(std::move(*follower));
  session->instance = inst;
  session->kind = kind;
  session->feedback = body.value("feedback", false);
  session->max_steps = body.value("max_steps", default_max_steps(game));
  if (session->max_steps == 0) throw bad_request("invalid-body", "max_steps must be positive");
  session->state = game.start();

  std::unique_lock lock(mutex_);
  const std::uint64_t n = session_counter_++;
  session->id = "s-" + hex_token(derive_seed(seed_, n));
  session->log.instance_ref = inst->id;
  session->log.seed = body.value("seed", derive_seed(seed_ ^ 0x5e55ULL, n));
  session->log.leader = "human";
  session->log.follower = session->follower.descriptor();
  // Written before the session becomes visible so no turn can race it.
  persist(*session);
  sessions_.emplace(session->id, session);
  lock.unlock();

  Json out{{"session", session->id}};
  out.update(session->status_json());
  out["feedback"] = session->feedback;
  out["observation"] = masked_view(*inst, session->state);
  return out;
}

Json SessionService::observation(const std::string& id) const {
  const auto s = find_session(id);
  std::lock_guard lock(s->turn);
  Json out{{"session", s->id}, {"turn", s->log.steps.size()}};
  out.update(s->status_json());
  out["observation"] = masked_view(*s->instance, s->state);
  return out;
}

Json SessionService::propose(const std::string& id, const Json& body) {
  const auto s = find_session(id);
  std::unique_lock lock(s->turn, std::try_to_lock);
  if (!lock.owns_lock()) {
    throw ServiceError(409, "turn-in-progress", "another proposal is being processed",
                       Json{{"session", id}});
  }
  if (s->finished()) {
    throw ServiceError(409, "session-finished", "session has already finished",
                       Json{{"outcome", to_string(*s->log.outcome)}});
  }
  if (!body.is_object() || !body.contains("action") || !body["action"].is_string()) {
    throw bad_request("invalid-body", "field 'action' (string) is required");
  }
  if (body.contains("turn") && body["turn"] != s->log.steps.size()) {
    throw ServiceError(409, "stale-turn", "proposal targets a turn that is no longer current",
                       Json{{"expected", s->log.steps.size()}});
  }
  const IdgInstance& game = s->instance->game;
  const std::string label = body["action"].get<std::string>();
  const auto action = game.find_action(s->state, label);
  if (!action) {
    Json available = Json::array();
    for (const auto& m : game.actions(s->state)) available.push_back(m.label);
    throw bad_request("unavailable-action", "action '" + label + "' is not available here",
                      Json{{"available", available}});
  }

  const FollowerAction decision = s->follower.decide(s->state, *action);
  StepRecord rec = make_step(game, s->log.steps.size(), s->state, *action, decision);
  const bool vetoed_harm =
      decision == FollowerAction::Disobey &&
      classify_action(game, s->state, *action) == ActionClass::Harmful;
  s->state = rec.after;
  Json out{{"session", s->id},
           {"turn", rec.turn},
           {"action", label},
           {"decision", to_string(decision)},
           {"reward", rec.leader_reward}};
  s->log.steps.push_back(std::move(rec));
  if (is_terminal(game, s->state)) {
    s->log.outcome = game.state_class(s->state) == StateClass::Goal ? Outcome::Goal : Outcome::Harm;
  } else if (s->log.steps.size() >= s->max_steps) {
    s->log.outcome = Outcome::StepBudgetExhausted;
  }
  persist(*s);

  out.update(s->status_json());
  if (!is_terminal(game, s->state)) out["observation"] = masked_view(*s->instance, s->state);
  if (s->feedback && vetoed_harm) {
    out["feedback"] = Json{{"reason", "harmful"}, {"observation", out["observation"]}};
  }
  return out;
}

Json SessionService::log(const std::string& id) const {
  const auto s = find_session(id);
  std::lock_guard lock(s->turn);
  Json out{{"session", s->id}};
  out.update(s->status_json());
  out["steps"] = s->log.steps.size();
  const IdgInstance& game = s->instance->game;
  // Follower rewards would reveal which vetoes were of harmful moves, so
  // the full log waits until the session is over.
  Json turns = Json::array();
  for (const auto& r : s->log.steps) {
    turns.push_back(Json{{"turn", r.turn},
                         {"state", game.state_name(r.before)},
                         {"action", game.action(r.before, r.proposal).label},
                         {"decision", to_string(r.decision)},
                         {"reward", r.leader_reward}});
  }
  out["turns"] = std::move(turns);
  if (s->finished()) {
    out["log"] = serialize_episode_log(game, s->log);
    out["instance"] = s->instance->canonical;
  }
  return out;
}

StateId SessionService::current_state(const std::string& id) const {
  const auto s = find_session(id);
  std::lock_guard lock(s->turn);
  return s->state;
}

// Append-only: the file always holds a prefix of the serialized log. The
// trailing "outcome none" line of an active session is withheld until the
// real outcome is known, so nothing written is ever rewritten.
void SessionService::persist(Session& s) const {
  if (!log_dir_) return;
  std::string text = serialize_episode_log(s.instance->game, s.log);
  if (!s.finished()) text.resize(text.rfind("outcome "));
  if (text.size() == s.persisted) return;
  std::ofstream out(*log_dir_ / (s.id + ".log"),
                    std::ios::binary | (s.persisted == 0 ? std::ios::trunc : std::ios::app));
  out.write(text.data() + s.persisted, static_cast<std::streamsize>(text.size() - s.persisted));
  out.flush();
  if (!out) throw Error("could not write the log of session " + s.id);
  s.persisted = text.size();
}

struct HttpServer::Impl {
  SessionService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(SessionService& svc) : service(svc) { routes(); }

  static void send(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <typename Fn>
  static void guarded(httplib::Response& res, int ok_status, Fn&& fn) {
    try {
      send(res, ok_status, fn());
    } catch (const ServiceError& e) {
      send(res, e.status(), e.body());
    } catch (const Json::exception& e) {
      send(res, 400, Json{{"code", "invalid-json"}, {"message", e.what()}, {"details", Json::object()}});
    } catch (const std::exception& e) {
      send(res, 500, Json{{"code", "internal"}, {"message", e.what()}, {"details", Json::object()}});
    }
  }

  static Json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    return Json::parse(req.body);
  }

  void routes() {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      send(res, 200, Json{{"status", "ok"}});
    });
    server.Post("/instances", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 201, [&] {
        const bool json = req.get_header_value("Content-Type").find("json") != std::string::npos ||
                          (!req.body.empty() && req.body.front() == '{');
        if (json) {
          const Json body = Json::parse(req.body);
          if (!body.contains("document") || !body["document"].is_string()) {
            throw bad_request("invalid-body", "field 'document' (string) is required");
          }
          return service.create_instance(body["document"].get<std::string>());
        }
        return service.create_instance(req.body);
      });
    });
    server.Get(R"(/instances/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 200, [&] { return service.get_instance(req.matches[1]); });
    });
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 201, [&] { return service.create_session(parse_body(req)); });
    });
    server.Get(R"(/sessions/([^/]+)/observation)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, 200, [&] { return service.observation(req.matches[1]); });
               });
    server.Post(R"(/sessions/([^/]+)/propose)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, 200, [&] { return service.propose(req.matches[1], parse_body(req)); });
                });
    server.Get(R"(/sessions/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, 200, [&] { return service.log(req.matches[1]); });
    });
  }
};

HttpServer::HttpServer(SessionService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) return -1;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace idg
