#include "cce/events.hpp"

namespace cce {

using nlohmann::json;

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Attempt: return "attempt";
    case EventKind::SocialCopy: return "social_copy";
    case EventKind::SocialNoop: return "social_noop";
    case EventKind::Inspect: return "inspect";
    case EventKind::InspectItem: return "inspect_item";
  }
  return "attempt";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "attempt") return EventKind::Attempt;
  if (s == "social_copy") return EventKind::SocialCopy;
  if (s == "social_noop") return EventKind::SocialNoop;
  if (s == "inspect") return EventKind::Inspect;
  if (s == "inspect_item") return EventKind::InspectItem;
  throw std::invalid_argument("unknown event kind '" + s + "'");
}

json to_json(const AttemptEvent& e) {
  json j;
  j["t"] = e.t;
  j["actor_id"] = e.actor_id;
  j["kind"] = to_string(e.kind);
  j["combination"] = e.combination;
  j["outcome"] = e.outcome ? json(*e.outcome) : json(nullptr);
  j["score_after"] = e.score_after;
  j["state_hash"] = hash_to_hex(e.state_hash);
  if (e.repeated) j["repeated"] = true;
  if (e.target) j["target"] = *e.target;
  if (e.item) j["item"] = *e.item;
  if (e.target_score) j["target_score"] = *e.target_score;
  return j;
}

AttemptEvent event_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("event must be a JSON object");
  for (const char* key : {"t", "actor_id", "kind", "combination", "outcome", "score_after", "state_hash"}) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("event is missing field '") + key + "'");
  }
  AttemptEvent e;
  if (!j["t"].is_number()) throw std::invalid_argument("field 't' must be a number");
  e.t = j["t"].get<double>();
  if (!j["actor_id"].is_number_integer()) throw std::invalid_argument("field 'actor_id' must be an integer");
  e.actor_id = j["actor_id"].get<int>();
  if (!j["kind"].is_string()) throw std::invalid_argument("field 'kind' must be a string");
  e.kind = event_kind_from_string(j["kind"].get<std::string>());
  if (!j["combination"].is_array()) throw std::invalid_argument("field 'combination' must be an array");
  for (const auto& v : j["combination"]) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw std::invalid_argument("combination ids must be non-negative integers");
    e.combination.push_back(v.get<ItemId>());
  }
  if (!j["outcome"].is_null()) {
    if (!j["outcome"].is_number_integer() || j["outcome"].get<long long>() < 0) throw std::invalid_argument("field 'outcome' must be an item id or null");
    e.outcome = j["outcome"].get<ItemId>();
  }
  if (!j["score_after"].is_number_integer()) throw std::invalid_argument("field 'score_after' must be an integer");
  e.score_after = j["score_after"].get<std::int64_t>();
  if (!j["state_hash"].is_string()) throw std::invalid_argument("field 'state_hash' must be a hex string");
  e.state_hash = hash_from_hex(j["state_hash"].get<std::string>());
  if (j.contains("repeated")) e.repeated = j["repeated"].get<bool>();
  if (j.contains("target") && !j["target"].is_null()) e.target = j["target"].get<int>();
  if (j.contains("item") && !j["item"].is_null()) e.item = j["item"].get<ItemId>();
  if (j.contains("target_score") && !j["target_score"].is_null()) e.target_score = j["target_score"].get<std::int64_t>();
  return e;
}

std::string to_jsonl_line(const AttemptEvent& e) { return to_json(e).dump(); }

std::string to_jsonl(const std::vector<AttemptEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += to_jsonl_line(e);
    out += '\n';
  }
  return out;
}

std::vector<AttemptEvent> read_event_log(std::istream& in) {
  std::vector<AttemptEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      events.push_back(event_from_json(json::parse(line)));
    } catch (const std::exception& ex) {
      throw LogParseError(line_no, ex.what());
    }
  }
  return events;
}

}  // namespace cce
