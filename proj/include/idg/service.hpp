#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "idg/episode.hpp"
#include "idg/error.hpp"
#include "idg/gridworld.hpp"
#include "idg/report.hpp"

namespace idg {

// Error surfaced to HTTP clients as {code, message, details}.
class ServiceError : public Error {
 public:
  ServiceError(int status, std::string code, const std::string& message, Json details = Json::object())
      : Error(message), status_(status), code_(std::move(code)), details_(std::move(details)) {}

  int status() const { return status_; }
  const std::string& code() const { return code_; }
  const Json& details() const { return details_; }
  Json body() const;

 private:
  int status_;
  std::string code_;
  Json details_;
};

enum class FollowerKind { Optimal, Learned, AlwaysObey };

// Interactive play with a human leader. Each method mirrors one endpoint and
// returns its JSON body; failures throw ServiceError.
//
// Responses about an active session only ever carry the leader's masked
// view. The one deliberate exception is the "harmful" reason code attached
// to a veto when the session was created with feedback on.
class SessionService {
 public:
  // With `log_dir`, every session's episode log is persisted there as
  // <session>.log after each turn.
  explicit SessionService(std::uint64_t seed = 0,
                          std::optional<std::filesystem::path> log_dir = std::nullopt);
  ~SessionService();

  Json create_instance(std::string_view document);                // POST /instances
  Json get_instance(const std::string& id) const;                 // GET /instances/{id}
  Json create_session(const Json& body);                          // POST /sessions
  Json observation(const std::string& session) const;             // GET /sessions/{id}/observation
  Json propose(const std::string& session, const Json& body);     // POST /sessions/{id}/propose
  Json log(const std::string& session) const;                     // GET /sessions/{id}/log

  // Current state, for tests and in-process callers such as `idg play`.
  StateId current_state(const std::string& session) const;

 private:
  struct Session;

  std::shared_ptr<Session> find_session(const std::string& id) const;
  std::shared_ptr<const LoadedInstance> find_instance(const std::string& id) const;
  void persist(Session& s) const;

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const LoadedInstance>> instances_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t seed_;
  std::uint64_t session_counter_ = 0;
  std::optional<std::filesystem::path> log_dir_;
};

// HTTP front end (cpp-httplib) routing the service's endpoints plus
// GET /healthz.
class HttpServer {
 public:
  explicit HttpServer(SessionService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Blocks until stop() is called.
  bool listen(const std::string& host, int port);
  // Binds (port 0 picks a free port), serves on a background thread and
  // returns the bound port, or -1 on failure.
  int start(const std::string& host, int port = 0);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace idg
