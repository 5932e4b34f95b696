#include <doctest.h>

#include <atomic>
#include <sstream>
#include <thread>

#include "cce/http_server.hpp"

// After the Eigen-using headers: resolv.h defines a _res macro.
#include <httplib.h>

using namespace cce;
using nlohmann::json;

namespace {

struct LiveServer {
  std::atomic<double> now{0};
  SessionManager sessions;
  HttpServer server;
  std::thread thread;
  int port = -1;

  explicit LiveServer(std::size_t capacity = 10)
      : sessions(default_task_tree(), 1, capacity, [this] { return now.load(); }), server(sessions) {
    port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    thread = std::thread([this] { server.serve(); });
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(10, 0);
    return c;
  }
};

json body_of(const httplib::Result& r) {
  REQUIRE(r);
  return json::parse(r->body);
}

json post(httplib::Client& c, const std::string& path, const json& body) {
  return body_of(c.Post(path, body.dump(), "application/json"));
}

}  // namespace

TEST_SUITE("http") {

TEST_CASE("create, view and attempt") {
  LiveServer s;
  auto c = s.client();
  auto r = c.Post("/sessions", json{{"condition", "semantic"}, {"mode", "individual"}, {"seed", 4}}.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == 201);
  const auto created = json::parse(r->body);
  const std::string id = created["session"];
  CHECK(created["player"] == 0);
  CHECK(created["view"]["inventory"].size() == 6);
  CHECK(created["view"]["inventory"][0]["label"] == "stone");
  CHECK(created["view"]["remaining"] == 600.0);

  const auto& t = default_task_tree();
  const auto recipe = *t.recipe_for(*t.find_by_name("sharp_stone"));
  const auto res = post(c, "/sessions/" + id + "/players/0/attempts", {{"items", recipe.to_vector()}});
  CHECK(res["success"] == true);
  CHECK(res["product"]["label"] == "sharp_stone");
  CHECK(res["event"]["kind"] == "attempt");
  CHECK(res["view"]["score"] == item_score(t, *t.find_by_name("sharp_stone")));
  CHECK(res["view"]["started"] == true);

  const auto fail = post(c, "/sessions/" + id + "/players/0/attempts", {{"items", {0, 0, 0}}});
  CHECK(fail["success"] == false);
  CHECK_FALSE(fail.contains("product"));

  const auto view = body_of(c.Get("/sessions/" + id + "/players/0/view"));
  CHECK(view["inventory"].size() == 7);

  auto log = c.Get("/sessions/" + id + "/log");
  REQUIRE(log);
  CHECK(log->get_header_value("Content-Type") == "application/x-ndjson");
  std::istringstream in(log->body);
  const auto events = read_event_log(in);
  CHECK(events.size() == 2);
  const auto state = replay_log(events, t);
  CHECK(state.players.at(0).score == view["score"].get<std::int64_t>());
}

TEST_CASE("group inspection and recipe view") {
  LiveServer s;
  auto c = s.client();
  const auto created = post(c, "/sessions", {{"condition", "non_semantic"}, {"mode", "group"}, {"seed", 2}});
  const std::string id = created["session"];
  CHECK(created["view"]["scoreboard"].size() == 6);
  const std::string label = created["view"]["inventory"][0]["label"];
  CHECK(label.size() == 3);
  CHECK(label != "stone");

  const auto& t = default_task_tree();
  const ItemId sharp = *t.find_by_name("sharp_stone");
  post(c, "/sessions/" + id + "/players/0/attempts", {{"items", t.recipe_for(sharp)->to_vector()}});
  s.now = 8.5;  // one bot tick: every bot copies the leader
  const auto seen = post(c, "/sessions/" + id + "/players/0/inspect", {{"target", 1}});
  CHECK(seen["target"] == 1);
  REQUIRE(seen["items"].size() == 1);
  CHECK(seen["items"][0]["id"] == sharp);
  CHECK(seen["event"]["kind"] == "inspect");
  CHECK(seen["event"]["target_score"] == item_score(t, sharp));

  const auto recipe = post(c, "/sessions/" + id + "/players/0/inspect-item", {{"target", 1}, {"item", sharp}});
  CHECK(recipe["ingredients"].size() == t.recipe_for(sharp)->size());
  CHECK(recipe["event"]["kind"] == "inspect_item");
  CHECK(recipe["item"]["label"].get<std::string>().size() == 3);

  std::istringstream in(c.Get("/sessions/" + id + "/log")->body);
  CHECK_NOTHROW(replay_log(read_event_log(in), t));
}

TEST_CASE("error statuses") {
  LiveServer s(2);
  auto c = s.client();
  const std::string solo = post(c, "/sessions", {{"mode", "individual"}})["session"];

  auto r = c.Get("/sessions/nope/players/0/view");
  REQUIRE(r);
  CHECK(r->status == 404);
  CHECK(json::parse(r->body)["error"] == "not_found");

  r = c.Post("/sessions/" + solo + "/players/0/inspect", json{{"target", 1}}.dump(), "application/json");
  CHECK(r->status == 409);
  CHECK(json::parse(r->body)["error"] == "wrong_mode");

  r = c.Post("/sessions/" + solo + "/players/0/attempts", json{{"items", {183}}}.dump(), "application/json");
  CHECK(r->status == 400);
  CHECK(json::parse(r->body)["error"] == "invalid");
  r = c.Post("/sessions/" + solo + "/players/0/attempts", "not json", "application/json");
  CHECK(r->status == 400);
  r = c.Post("/sessions/" + solo + "/players/0/attempts", json{{"items", "x"}}.dump(), "application/json");
  CHECK(r->status == 400);
  r = c.Post("/sessions", json{{"condition", "maybe"}}.dump(), "application/json");
  CHECK(r->status == 400);
  r = c.Get("/sessions/" + solo + "/players/7/view");
  CHECK(r->status == 404);

  post(c, "/sessions/" + solo + "/players/0/attempts", {{"items", {0}}});
  s.now = 601;
  r = c.Post("/sessions/" + solo + "/players/0/attempts", json{{"items", {0}}}.dump(), "application/json");
  CHECK(r->status == 409);
  CHECK(json::parse(r->body)["error"] == "session_expired");

  post(c, "/sessions", json::object());
  r = c.Post("/sessions", "{}", "application/json");
  CHECK(r->status == 503);
  CHECK(json::parse(r->body)["error"] == "capacity_exceeded");
}

TEST_CASE("event stream backlog") {
  LiveServer s;
  auto c = s.client();
  const std::string id = post(c, "/sessions", {{"mode", "group"}, {"seed", 3}})["session"];
  post(c, "/sessions/" + id + "/players/0/attempts", {{"items", {0, 1}}});
  s.now = 16.5;
  auto r = c.Get("/sessions/" + id + "/events?follow=0");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Content-Type") == "text/event-stream");
  const std::string& body = r->body;
  // 1 human attempt + 2 ticks of 5 bots, then a clock frame.
  std::size_t frames = 0;
  for (std::size_t pos = 0; (pos = body.find("\n\n", pos)) != std::string::npos; pos += 2) ++frames;
  CHECK(frames == 12);
  CHECK(body.rfind("id: 0\nevent: attempt\ndata: ", 0) == 0);
  CHECK(body.find("event: clock") != std::string::npos);
  CHECK(body.find("event: end") == std::string::npos);

  r = c.Get("/sessions/" + id + "/events?follow=0&from=11");
  REQUIRE(r);
  CHECK(r->body.rfind("id: 11\nevent: clock\n", 0) == 0);

  s.now = 700;
  r = c.Get("/sessions/" + id + "/events?from=11");  // follow, but the session is over
  REQUIRE(r);
  CHECK(r->body.find("event: end") != std::string::npos);
  const auto last_data = r->body.rfind("data: ");
  CHECK(json::parse(r->body.substr(last_data + 6))["events"] == 1 + 75 * 5);

  CHECK(c.Get("/sessions/nope/events")->status == 404);
}

TEST_CASE("event stream follows live changes") {
  LiveServer s;
  auto c = s.client();
  const std::string id = post(c, "/sessions", {{"mode", "individual"}})["session"];
  std::string received;
  std::thread reader([&] {
    auto rc = s.client();
    rc.Get("/sessions/" + id + "/events", [&](const char* data, std::size_t n) {
      received.append(data, n);
      return received.find("event: end") == std::string::npos;
    });
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  post(c, "/sessions/" + id + "/players/0/attempts", {{"items", {2}}});
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  s.now = 1000;
  s.sessions.notify();
  reader.join();
  CHECK(received.find("event: attempt") != std::string::npos);
  CHECK(received.find("event: end") != std::string::npos);
}

}
