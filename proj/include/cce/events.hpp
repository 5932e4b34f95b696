#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cce/combination.hpp"

namespace cce {

enum class EventKind { Attempt, SocialCopy, SocialNoop, Inspect, InspectItem };

const char* to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);

/// One timestamped innovation attempt or social-learning act. Shared by
/// simulated agents, bots and human session players.
struct AttemptEvent {
  double t = 0;
  int actor_id = 0;
  EventKind kind = EventKind::Attempt;
  std::vector<ItemId> combination;
  std::optional<ItemId> outcome;
  std::int64_t score_after = 0;
  /// Actor's inventory hash before the event.
  std::uint64_t state_hash = 0;
  /// Attempt whose multiset was already in the actor's memory.
  bool repeated = false;
  /// Inspected player (inspect, inspect_item) or demonstrator (social_copy).
  std::optional<int> target;
  /// Item whose recipe was viewed (inspect_item).
  std::optional<ItemId> item;
  /// Inspected player's score at the time of an inspect event.
  std::optional<std::int64_t> target_score;

  bool success() const { return kind == EventKind::Attempt && outcome.has_value(); }
  friend bool operator==(const AttemptEvent&, const AttemptEvent&) = default;
};

nlohmann::json to_json(const AttemptEvent& e);
AttemptEvent event_from_json(const nlohmann::json& j);

std::string to_jsonl_line(const AttemptEvent& e);
std::string to_jsonl(const std::vector<AttemptEvent>& events);

class LogParseError : public std::runtime_error {
 public:
  LogParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses AttemptEvent JSON-lines; blank lines are skipped.
std::vector<AttemptEvent> read_event_log(std::istream& in);

}  // namespace cce
