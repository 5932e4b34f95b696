#include "cce/http_server.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>

namespace cce {

using nlohmann::json;

namespace {

int status_for(SessionError::Code code) {
  switch (code) {
    case SessionError::Code::NotFound: return 404;
    case SessionError::Code::Expired: return 409;
    case SessionError::Code::WrongMode: return 409;
    case SessionError::Code::Capacity: return 503;
    case SessionError::Code::Invalid: return 400;
  }
  return 400;
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, {{"error", code}, {"message", message}}, status);
}

const char* code_name(SessionError::Code code) {
  switch (code) {
    case SessionError::Code::NotFound: return "not_found";
    case SessionError::Code::Expired: return "session_expired";
    case SessionError::Code::WrongMode: return "wrong_mode";
    case SessionError::Code::Capacity: return "capacity_exceeded";
    case SessionError::Code::Invalid: return "invalid";
  }
  return "invalid";
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw SessionError(SessionError::Code::Invalid, "request body must be a JSON object");
  return j;
}

template <typename T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SessionError(SessionError::Code::Invalid, std::string("field '") + key + "' has the wrong type");
  }
}

json items_json(const std::vector<ItemView>& items) {
  json out = json::array();
  for (const auto& it : items) out.push_back({{"id", it.id}, {"label", it.label}});
  return out;
}

std::string sse_frame(std::size_t id, const std::string& event, const json& data) {
  return "id: " + std::to_string(id) + "\nevent: " + event + "\ndata: " + data.dump() + "\n\n";
}

}  // namespace

struct HttpServer::Impl {
  SessionManager& sessions;
  httplib::Server server;
  std::atomic<bool> stopping{false};
  std::thread ticker;

  explicit Impl(SessionManager& s) : sessions(s) { routes(); }

  template <typename F>
  void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const SessionError& e) {
      send_error(res, status_for(e.code()), code_name(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 400, "invalid", e.what());
    }
  }

  static int player_param(const httplib::Request& req) {
    try {
      return std::stoi(req.matches[2].str());
    } catch (const std::exception&) {
      throw SessionError(SessionError::Code::NotFound, "bad player id");
    }
  }

  void routes() {
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        const auto condition = condition_from_string(field<std::string>(body, "condition", "semantic"));
        const auto mode = play_mode_from_string(field<std::string>(body, "mode", "individual"));
        SessionOptions opt;
        opt.humans = field<int>(body, "humans", opt.humans);
        opt.bots = field<int>(body, "bots", opt.bots);
        opt.duration = field<double>(body, "duration", opt.duration);
        opt.bot_cadence = field<double>(body, "bot_cadence", opt.bot_cadence);
        opt.bonus_rate = field<double>(body, "bonus_rate", opt.bonus_rate);
        const auto seed = field<std::uint64_t>(body, "seed", 0);
        const std::string id = sessions.create(condition, mode, seed, opt);
        auto h = sessions.acquire(id);
        send_json(res, {{"session", id}, {"player", 0}, {"view", to_json(h.session->view(0, sessions.now()))}}, 201);
      });
    });

    server.Get(R"(/sessions/([^/]+)/players/(-?\d+)/view)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto h = sessions.acquire(req.matches[1].str());
        send_json(res, to_json(h.session->view(player_param(req), sessions.now())));
      });
    });

    server.Post(R"(/sessions/([^/]+)/players/(-?\d+)/attempts)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        if (!body.contains("items") || !body["items"].is_array()) throw SessionError(SessionError::Code::Invalid, "field 'items' must be an array of item ids");
        std::vector<ItemId> items;
        for (const auto& v : body["items"]) {
          if (!v.is_number_integer() || v.get<long long>() < 0) throw SessionError(SessionError::Code::Invalid, "item ids must be non-negative integers");
          items.push_back(v.get<ItemId>());
        }
        auto h = sessions.acquire(req.matches[1].str());
        const int p = player_param(req);
        const double now = sessions.now();
        const auto ev = h.session->submit_attempt(p, items, now);
        json out{{"event", to_json(ev)}, {"success", ev.outcome.has_value()}, {"view", to_json(h.session->view(p, now))}};
        if (ev.outcome) out["product"] = {{"id", *ev.outcome}, {"label", h.session->label(*ev.outcome)}};
        h.lock.unlock();
        sessions.notify();
        send_json(res, out);
      });
    });

    server.Post(R"(/sessions/([^/]+)/players/(-?\d+)/inspect)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        if (!body.contains("target")) throw SessionError(SessionError::Code::Invalid, "field 'target' is required");
        const int target = field<int>(body, "target", -1);
        auto h = sessions.acquire(req.matches[1].str());
        const auto items = h.session->inspect_player(player_param(req), target, sessions.now());
        json out{{"target", target}, {"items", items_json(items)}, {"event", to_json(h.session->log().back())}};
        h.lock.unlock();
        sessions.notify();
        send_json(res, out);
      });
    });

    server.Post(R"(/sessions/([^/]+)/players/(-?\d+)/inspect-item)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        if (!body.contains("target") || !body.contains("item")) throw SessionError(SessionError::Code::Invalid, "fields 'target' and 'item' are required");
        const int target = field<int>(body, "target", -1);
        const auto item = field<ItemId>(body, "item", 0);
        auto h = sessions.acquire(req.matches[1].str());
        const auto ingredients = h.session->inspect_item_recipe(player_param(req), target, item, sessions.now());
        json out{{"target", target},
                 {"item", {{"id", item}, {"label", h.session->label(item)}}},
                 {"ingredients", items_json(ingredients)},
                 {"event", to_json(h.session->log().back())}};
        h.lock.unlock();
        sessions.notify();
        send_json(res, out);
      });
    });

    server.Get(R"(/sessions/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto h = sessions.acquire(req.matches[1].str());
        res.set_content(to_jsonl(h.session->log()), "application/x-ndjson");
      });
    });

    server.Get(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1].str();
        sessions.acquire(id);  // 404 early
        std::size_t from = 0;
        if (req.has_param("from")) from = std::stoul(req.get_param_value("from"));
        const bool follow = !req.has_param("follow") || req.get_param_value("follow") != "0";
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [this, id, from, follow](std::size_t, httplib::DataSink& sink) mutable {
          while (!stopping) {
            std::string chunk;
            bool done = false;
            {
              auto h = sessions.acquire(id);
              const auto& log = h.session->log();
              for (; from < log.size(); ++from) chunk += sse_frame(from, to_string(log[from].kind), to_json(log[from]));
              const auto view = h.session->view(0, sessions.now());
              chunk += sse_frame(from, "clock", {{"remaining", view.remaining}, {"scoreboard", to_json(view)["scoreboard"]}});
              done = view.expired || !follow;
              if (view.expired) chunk += sse_frame(from, "end", {{"events", log.size()}});
            }
            if (!sink.write(chunk.data(), chunk.size())) return false;
            if (done) {
              sink.done();
              return true;
            }
            sessions.wait_for_change(1.0);
          }
          sink.done();
          return true;
        });
      });
    });
  }
};

HttpServer::HttpServer(SessionManager& sessions) : impl_(std::make_unique<Impl>(sessions)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() {
  impl_->ticker = std::thread([this] {
    while (!impl_->stopping) {
      bool changed = false;
      for (const auto& id : impl_->sessions.ids()) {
        try {
          auto h = impl_->sessions.acquire(id);
          changed = changed || h.session->expired(impl_->sessions.now());
        } catch (const SessionError&) {
        }
      }
      if (changed) impl_->sessions.notify();
      std::this_thread::sleep_for(std::chrono::milliseconds(500));
    }
  });
  return impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  impl_->sessions.notify();
  impl_->server.stop();
  if (impl_->ticker.joinable()) impl_->ticker.join();
}

}  // namespace cce
