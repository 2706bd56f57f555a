#include <doctest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "idg/error.hpp"
#include "idg/game.hpp"
#include "idg/learn.hpp"
#include "idg/service.hpp"
#include "support/oracles.hpp"

using namespace idg;

namespace {

struct Server {
  SessionService service;
  HttpServer http;
  int port;
  httplib::Client client;

  explicit Server(std::uint64_t seed = 1, std::optional<std::filesystem::path> dir = std::nullopt)
      : service(seed, std::move(dir)), http(service), port(http.start("127.0.0.1")),
        client("127.0.0.1", port) {
    REQUIRE(port > 0);
  }

  std::pair<int, Json> get(const std::string& path) {
    auto res = client.Get(path);
    REQUIRE(res);
    return {res->status, Json::parse(res->body)};
  }

  std::pair<int, Json> post(const std::string& path, const std::string& body,
                            const std::string& type = "application/json") {
    auto res = client.Post(path, body, type);
    REQUIRE(res);
    return {res->status, Json::parse(res->body)};
  }

  std::pair<int, Json> post(const std::string& path, const Json& body) { return post(path, body.dump()); }

  std::string upload(const std::string& doc) {
    auto [status, body] = post("/instances", doc, "text/plain");
    REQUIRE(status == 201);
    return body["id"];
  }

  std::string open(const std::string& instance, const std::string& follower = "optimal", bool feedback = true) {
    auto [status, body] = post("/sessions", Json{{"instance", instance}, {"follower", follower}, {"feedback", feedback}});
    REQUIRE(status == 201);
    return body["session"];
  }

  std::pair<int, Json> propose(const std::string& session, const std::string& action) {
    return post("/sessions/" + session + "/propose", Json{{"action", action}});
  }
};

void check_error_shape(const Json& body) {
  CHECK(body.contains("code"));
  CHECK(body.contains("message"));
  CHECK(body.contains("details"));
}

// Walks every field of a response for anything that would reveal lava:
// coordinate objects or "(x,y)" names of lava tiles, or the words lava and
// harmful outside the feedback reason code.
void scan_for_leaks(const Json& j, const GridInstance& grid, const std::string& path = "") {
  if (j.is_object()) {
    if (j.contains("x") && j.contains("y") && j["x"].is_number() && j["y"].is_number()) {
      CHECK_MESSAGE(!grid.lava.contains(Coord{j["x"].get<int>(), j["y"].get<int>()}), (std::string("lava coordinate at ") + path));
    }
    for (const auto& [k, v] : j.items()) {
      CHECK_MESSAGE(k.find("lava") == std::string::npos, (std::string("lava key at ") + path));
      CHECK_MESSAGE(k.find("harm") == std::string::npos, (std::string("harm key at ") + path));
      scan_for_leaks(v, grid, path + "/" + k);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) scan_for_leaks(j[i], grid, path + "/" + std::to_string(i));
  } else if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (path == "/feedback/reason") {
      CHECK(s == "harmful");
      return;
    }
    CHECK_MESSAGE(s.find("lava") == std::string::npos, (std::string("lava text at ") + path));
    CHECK_MESSAGE(s.find("harm") == std::string::npos, (std::string("harm text at ") + path));
    for (const auto& c : grid.lava) {
      const std::string name = "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
      CHECK_MESSAGE(s.find(name) == std::string::npos, (std::string("lava tile ") + name + " at " + path));
    }
  }
}

}  // namespace

TEST_CASE("health and instances") {
  Server srv;
  auto [hs, hb] = srv.get("/healthz");
  CHECK(hs == 200);
  CHECK(hb["status"] == "ok");

  const std::string id = srv.upload(oracle::kT3);
  auto [gs, gb] = srv.get("/instances/" + id);
  CHECK(gs == 200);
  CHECK(gb["document"] == oracle::kT3);
  CHECK(gb["kind"] == "grid");

  CHECK(srv.upload(oracle::kT3) == id);
  auto [js, jb] = srv.post("/instances", Json{{"document", oracle::kT3}});
  CHECK(js == 201);
  CHECK(jb["id"] == id);
  CHECK(srv.upload(oracle::kTrap4) != id);

  auto [es, eb] = srv.post("/instances", std::string("grid 3 3\nstart 0 0\ngoal 1 1\nlava 1 1\n"), "text/plain");
  CHECK(es == 400);
  check_error_shape(eb);
  CHECK(eb["message"].get<std::string>().find("overlapping goal/lava") != std::string::npos);
  CHECK(eb["message"].get<std::string>().find("(1,1)") != std::string::npos);

  auto [ps, pb] = srv.post("/instances", std::string("grid 3 3\nstart 0 0\nteleport 1 1\n"), "text/plain");
  CHECK(ps == 400);
  CHECK(pb["code"] == "invalid-document");
  CHECK(pb["details"]["line"] == 3);

  auto [ns, nb] = srv.get("/instances/nope");
  CHECK(ns == 404);
  check_error_shape(nb);

  auto [bs, bb] = srv.post("/instances", std::string("{not json"), "application/json");
  CHECK(bs == 400);
  check_error_shape(bb);
}

TEST_CASE("sessions") {
  Server srv;
  const std::string id = srv.upload(oracle::kT3);
  const auto grid = parse_instance(oracle::kT3);

  auto [s1, b1] = srv.post("/sessions", Json{{"instance", id}, {"follower", "optimal"}, {"feedback", true}});
  CHECK(s1 == 201);
  CHECK(b1["status"] == "active");
  CHECK(b1["observation"]["width"] == 3);
  CHECK(b1["observation"]["height"] == 3);
  CHECK(b1["observation"]["goals"] == Json::array({Json{{"x", 2}, {"y", 2}}}));
  CHECK(b1["observation"]["position"] == Json{{"x", 0}, {"y", 0}});
  scan_for_leaks(b1, grid);

  auto [s2, b2] = srv.post("/sessions", Json{{"instance", id}, {"follower", "always-obey"}, {"feedback", false}});
  CHECK(s2 == 201);
  CHECK(b2["status"] == "active");
  CHECK(b2["session"] != b1["session"]);

  auto [s3, b3] = srv.post("/sessions", Json{{"instance", "missing"}});
  CHECK(s3 == 404);
  check_error_shape(b3);

  auto [s4, b4] = srv.post("/sessions", Json{{"instance", id}, {"follower", "learned"}});
  CHECK(s4 == 400);
  CHECK(b4["code"] == "missing-table");

  auto [s5, b5] = srv.post("/sessions", Json{{"instance", id}, {"follower", "telepathic"}});
  CHECK(s5 == 400);

  const auto li = oracle::t3();
  TrainConfig c;
  c.episodes = 20000;
  c.seed = 1;
  const auto trained = train(li.game, c);
  auto [s6, b6] = srv.post("/sessions", Json{{"instance", id},
                                             {"follower", "learned"},
                                             {"tables", serialize_tables(li.game, trained.leader, trained.follower)}});
  CHECK(s6 == 201);
  auto [s7, b7] = srv.post("/sessions", Json{{"instance", id}, {"follower", "learned"}, {"tables", "garbage"}});
  CHECK(s7 == 400);

  const std::string terminal = srv.upload("idg\nstate g goal\nstate a other\nstart g\naction a x g\n");
  auto [s8, b8] = srv.post("/sessions", Json{{"instance", terminal}});
  CHECK(s8 == 400);
  check_error_shape(b8);
}

TEST_CASE("propose on T3") {
  Server srv;
  const std::string id = srv.upload(oracle::kT3);
  const auto grid = parse_instance(oracle::kT3);

  SUBCASE("veto with feedback") {
    const std::string s = srv.open(id, "optimal", true);
    auto [u, ub] = srv.propose(s, "up");
    CHECK(u == 400);
    CHECK(ub["code"] == "unavailable-action");
    CHECK(ub["details"]["available"] == Json::array({"right", "down"}));

    CHECK(srv.propose(s, "right").first == 200);
    CHECK(srv.propose(s, "right").first == 200);
    auto [st, veto] = srv.propose(s, "down");
    CHECK(st == 200);
    CHECK(veto["decision"] == "disobey");
    CHECK(veto["feedback"]["reason"] == "harmful");
    CHECK(veto["observation"]["position"] == Json{{"x", 2}, {"y", 0}});
    CHECK(veto["feedback"]["observation"] == veto["observation"]);
    CHECK(veto["reward"] == 0);
    CHECK_FALSE(veto.contains("rewards"));
    CHECK(veto["status"] == "active");
    scan_for_leaks(veto, grid);
  }
  SUBCASE("veto without feedback") {
    const std::string s = srv.open(id, "optimal", false);
    srv.propose(s, "right");
    srv.propose(s, "right");
    auto [st, veto] = srv.propose(s, "down");
    CHECK(veto["decision"] == "disobey");
    CHECK_FALSE(veto.contains("feedback"));
  }
  SUBCASE("four-step win, then conflict and log") {
    const std::string s = srv.open(id);
    auto [fs, fresh] = srv.get("/sessions/" + s + "/log");
    CHECK(fs == 200);
    CHECK(fresh["steps"] == 0);
    CHECK_FALSE(fresh.contains("outcome"));
    CHECK_FALSE(fresh.contains("instance"));
    CHECK_FALSE(fresh.contains("log"));
    CHECK(fresh["turns"] == Json::array());

    for (const char* a : {"down", "down", "right"}) {
      auto [st, body] = srv.propose(s, a);
      CHECK(st == 200);
      CHECK(body["decision"] == "obey");
    }
    auto [st, win] = srv.propose(s, "right");
    CHECK(win["decision"] == "obey");
    CHECK(win["status"] == "finished");
    CHECK(win["outcome"] == "goal");
    CHECK(win["reward"] == 1);

    auto [cs, conflict] = srv.propose(s, "up");
    CHECK(cs == 409);
    check_error_shape(conflict);

    auto [ls, log] = srv.get("/sessions/" + s + "/log");
    CHECK(log["steps"] == 4);
    CHECK(log["outcome"] == "goal");
    CHECK(log["instance"] == oracle::kT3);
    const auto li = oracle::t3();
    const auto parsed = parse_episode_log(li.game, log["log"].get<std::string>());
    CHECK(parsed.steps.size() == 4);
    CHECK(parsed.outcome == std::optional<Outcome>{Outcome::Goal});
    CHECK(parsed.instance_ref == id);
  }
  SUBCASE("always-obey walks into lava") {
    const std::string s = srv.open(id, "always-obey", true);
    auto [st, body] = srv.propose(s, "down");
    auto [st2, harm] = srv.propose(s, "right");
    CHECK(harm["decision"] == "obey");
    CHECK(harm["status"] == "finished");
    CHECK(harm["outcome"] == "harm");
    CHECK(harm["reward"] == -1);
    CHECK_FALSE(harm.contains("observation"));
    auto [ls, log] = srv.get("/sessions/" + s + "/log");
    CHECK(log["instance"] == oracle::kT3);
  }
  SUBCASE("unknown session") {
    CHECK(srv.get("/sessions/zzz/observation").first == 404);
    CHECK(srv.get("/sessions/zzz/log").first == 404);
    CHECK(srv.propose("zzz", "up").first == 404);
  }
  SUBCASE("malformed proposals") {
    const std::string s = srv.open(id);
    CHECK(srv.post("/sessions/" + s + "/propose", Json{{"move", "up"}}).first == 400);
    CHECK(srv.post("/sessions/" + s + "/propose", std::string("[1,2"), "application/json").first == 400);
    CHECK(srv.post("/sessions/" + s + "/propose", Json{{"action", "down"}, {"turn", 3}}).first == 409);
    CHECK(srv.post("/sessions/" + s + "/propose", Json{{"action", "down"}, {"turn", 0}}).first == 200);
  }
}

TEST_CASE("masking and log coherence over random play") {
  Server srv(5);
  std::mt19937_64 rng(12);
  int responses = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto grid = generate_random(5, 4, 0.3, true, seed);
    const std::string doc = serialize_instance(grid);
    const std::string id = srv.upload(doc);
    const auto li = load_instance_document(doc);
    for (const char* follower : {"optimal", "always-obey"}) {
      const std::string s = srv.open(id, follower, rng() % 2 == 0);
      for (int turn = 0; turn < 40; ++turn) {
        auto [os, obs] = srv.get("/sessions/" + s + "/observation");
        REQUIRE(os == 200);
        if (obs["status"] == "finished") break;
        scan_for_leaks(obs, grid);
        auto [ls, log] = srv.get("/sessions/" + s + "/log");
        scan_for_leaks(log, grid);
        responses += 2;

        // Active sessions expose only the leader's history; replay it.
        REQUIRE_FALSE(log.contains("log"));
        REQUIRE(log["turns"].size() == log["steps"].get<std::size_t>());
        StateId replayed = li.game.start();
        for (const auto& t : log["turns"]) {
          CHECK(li.game.state_name(replayed) == t["state"]);
          const ActionId a = li.game.find_action(replayed, t["action"].get<std::string>()).value();
          replayed = apply_protocol(li.game, replayed, a,
                                    t["decision"] == "obey" ? FollowerAction::Obey : FollowerAction::Disobey);
        }
        CHECK(replayed == srv.service.current_state(s));
        CHECK(li.game.state_name(replayed) == obs["observation"]["state"]);

        const auto& avail = obs["observation"]["available"];
        const std::string move = avail[rng() % avail.size()];
        auto [ps, res] = srv.propose(s, move);
        REQUIRE(ps == 200);
        if (res["status"] == "active") scan_for_leaks(res, grid);
        ++responses;
        if (res["decision"] == "disobey" && res.contains("feedback")) {
          CHECK(res["feedback"]["reason"] == "harmful");
        }
      }
    }
  }
  CHECK(responses > 100);
}

TEST_CASE("concurrent proposals: exactly one wins each turn") {
  SessionService service(3);
  const std::string id = service.create_instance("grid 6 1\nstart 0 0\ngoal 5 0\n")["id"];
  const std::string s = service.create_session(Json{{"instance", id}})["session"];
  for (std::size_t turn = 0; turn < 4; ++turn) {
    std::atomic<int> wins{0}, conflicts{0}, other{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&] {
        try {
          service.propose(s, Json{{"action", "right"}, {"turn", turn}});
          ++wins;
        } catch (const ServiceError& e) {
          (e.status() == 409 ? conflicts : other)++;
        }
      });
    }
    for (auto& t : threads) t.join();
    CHECK(wins == 1);
    CHECK(conflicts == 7);
    CHECK(other == 0);
    CHECK(service.log(s)["steps"] == turn + 1);
  }
}

TEST_CASE("logs are persisted per session") {
  const auto dir = std::filesystem::temp_directory_path() / "idg-service-test-logs";
  std::filesystem::remove_all(dir);
  {
    Server srv(7, dir);
    const std::string id = srv.upload(oracle::kT3);
    const std::string s = srv.open(id);
    auto file = [&] {
      std::ifstream in(dir / (s + ".log"));
      std::stringstream buf;
      buf << in.rdbuf();
      return buf.str();
    };
    std::string previous = file();
    CHECK(previous.find("idg-episode 1\n") == 0);
    for (const char* a : {"down", "down", "right", "right"}) {
      srv.propose(s, a);
      const std::string now = file();
      // Append-only: every earlier snapshot is a prefix of the next.
      CHECK(now.compare(0, previous.size(), previous) == 0);
      CHECK(now.size() > previous.size());
      previous = now;
    }
    auto [ls, log] = srv.get("/sessions/" + s + "/log");
    CHECK(log["status"] == "finished");
    CHECK(file() == log["log"].get<std::string>());
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("session ids follow the service seed") {
  auto ids = [](std::uint64_t seed) {
    SessionService svc(seed);
    const std::string id = svc.create_instance(oracle::kT3)["id"];
    return std::vector<std::string>{svc.create_session(Json{{"instance", id}})["session"],
                                    svc.create_session(Json{{"instance", id}})["session"]};
  };
  CHECK(ids(4) == ids(4));
  CHECK(ids(4) != ids(5));
}
