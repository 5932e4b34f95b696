#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "cce/agent.hpp"
#include "cce/combination.hpp"
#include "cce/events.hpp"
#include "cce/rng.hpp"
#include "cce/task_tree.hpp"

namespace cce {

enum class Condition { Semantic, NonSemantic };
enum class PlayMode { Individual, Group };

const char* to_string(Condition c);
const char* to_string(PlayMode m);
Condition condition_from_string(const std::string& s);
PlayMode play_mode_from_string(const std::string& s);

class SessionError : public std::runtime_error {
 public:
  enum class Code { NotFound, Expired, Invalid, WrongMode, Capacity };
  SessionError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// Replayed log disagrees with the rules; `index` is the 0-based event position.
class IntegrityError : public std::runtime_error {
 public:
  IntegrityError(std::size_t index, const std::string& what)
      : std::runtime_error("event " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

struct SessionOptions {
  int humans = 1;
  /// Bot co-players in group mode; ignored in individual mode.
  int bots = 5;
  double duration = 600;
  double bot_cadence = 8;
  double bonus_rate = 0.01;
  double score_base = 2.0;
};

/// Display names for one deployment. Semantic sessions show item names,
/// non-semantic ones show 3-letter codes fixed by the deployment seed.
class LabelSet {
 public:
  LabelSet(const TaskTree& tree, std::uint64_t deployment_seed);
  const std::string& label(ItemId id, Condition c) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::string> codes_;
};

struct ItemView {
  ItemId id = 0;
  std::string label;
};

struct ScoreEntry {
  int player = 0;
  bool bot = false;
  std::int64_t score = 0;
};

struct PlayerView {
  std::string session;
  int player = 0;
  Condition condition = Condition::Semantic;
  PlayMode mode = PlayMode::Individual;
  std::vector<ItemView> inventory;
  std::int64_t score = 0;
  double bonus = 0;
  /// Descending score, ties by player id.
  std::vector<ScoreEntry> scoreboard;
  double remaining = 0;
  bool started = false;
  bool expired = false;
};

nlohmann::json to_json(const PlayerView& v);

struct SessionPlayer {
  int id = 0;
  bool bot = false;
  Inventory inventory;
  std::int64_t score = 0;
  std::unordered_set<Combination, CombinationHash> attempt_memory;
};

/// One play session. Times passed in are absolute seconds on the caller's
/// clock; event timestamps are seconds since the clock started, which
/// happens on the first human action. Not thread-safe on its own.
class Session {
 public:
  Session(std::string id, const TaskTree& tree, const LabelSet& labels, Condition condition, PlayMode mode,
          std::uint64_t seed, const SessionOptions& options);

  const std::string& id() const { return id_; }
  Condition condition() const { return condition_; }
  PlayMode mode() const { return mode_; }
  const SessionOptions& options() const { return options_; }
  std::span<const SessionPlayer> players() const { return players_; }
  const std::vector<AttemptEvent>& log() const { return log_; }

  PlayerView view(int player, double now) const;
  double remaining(double now) const;
  bool expired(double now) const;

  AttemptEvent submit_attempt(int player, std::span<const ItemId> items, double now);
  std::vector<ItemView> inspect_player(int player, int target, double now);
  std::vector<ItemView> inspect_item_recipe(int player, int target, ItemId item, double now);
  /// Runs every bot tick due by `now` (capped at the session end).
  std::vector<AttemptEvent> advance_bots(double now);

  std::string label(ItemId id) const { return labels_->label(id, condition_); }

 private:
  SessionPlayer& human(int player);
  const SessionPlayer& player_at(int player) const;
  void start_clock(double now);
  double elapsed(double now) const;
  void bot_step(SessionPlayer& bot, double t);
  std::vector<ItemView> labelled(std::span<const ItemId> ids) const;

  std::string id_;
  const TaskTree* tree_;
  const LabelSet* labels_;
  Condition condition_;
  PlayMode mode_;
  SessionOptions options_;
  Rng rng_;
  std::vector<SessionPlayer> players_;
  std::vector<AttemptEvent> log_;
  std::optional<double> start_;
  long ticks_done_ = 0;
};

struct ReplayedPlayer {
  Inventory inventory;
  std::int64_t score = 0;
  std::size_t attempts = 0;
  std::size_t unique_attempts = 0;
};

struct ReplayState {
  std::map<int, ReplayedPlayer> players;
  std::size_t events = 0;
};

/// Re-applies a session log through the game rules, checking every recorded
/// outcome, score and state hash. Throws IntegrityError at the first mismatch.
ReplayState replay_log(std::span<const AttemptEvent> log, const TaskTree& tree, double score_base = 2.0);

/// Thread-safe registry of live sessions; each session has its own lock.
class SessionManager {
 public:
  using Clock = std::function<double()>;

  SessionManager(const TaskTree& tree, std::uint64_t deployment_seed, std::size_t capacity, Clock clock);

  struct Handle {
    std::shared_ptr<std::mutex> mutex;
    std::shared_ptr<Session> session;
    std::unique_lock<std::mutex> lock;
  };

  std::string create(Condition condition, PlayMode mode, std::uint64_t seed, const SessionOptions& options);
  /// Locks the session and brings its bots up to date.
  Handle acquire(const std::string& id);
  std::vector<std::string> ids() const;
  double now() const { return clock_(); }
  const TaskTree& tree() const { return *tree_; }

  /// Wakes event-stream readers; called after any mutation.
  void notify();
  /// Blocks until notified or the timeout passes.
  void wait_for_change(double timeout_seconds);

 private:
  const TaskTree* tree_;
  LabelSet labels_;
  std::size_t capacity_;
  Clock clock_;
  mutable std::mutex mutex_;
  struct Entry {
    std::shared_ptr<Session> session;
    std::shared_ptr<std::mutex> lock;
  };
  std::map<std::string, Entry> sessions_;
  std::size_t created_ = 0;
  std::mutex change_mutex_;
  std::condition_variable change_;
  std::uint64_t generation_ = 0;
};

}  // namespace cce
