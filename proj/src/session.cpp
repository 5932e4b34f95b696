#include "cce/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <variant>

namespace cce {

using nlohmann::json;

const char* to_string(Condition c) { return c == Condition::Semantic ? "semantic" : "non_semantic"; }
const char* to_string(PlayMode m) { return m == PlayMode::Individual ? "individual" : "group"; }

Condition condition_from_string(const std::string& s) {
  if (s == "semantic") return Condition::Semantic;
  if (s == "non_semantic") return Condition::NonSemantic;
  throw SessionError(SessionError::Code::Invalid, "unknown condition '" + s + "'");
}

PlayMode play_mode_from_string(const std::string& s) {
  if (s == "individual") return PlayMode::Individual;
  if (s == "group") return PlayMode::Group;
  throw SessionError(SessionError::Code::Invalid, "unknown mode '" + s + "'");
}

LabelSet::LabelSet(const TaskTree& tree, std::uint64_t deployment_seed) {
  Rng rng = make_stream(deployment_seed, 0);
  std::set<std::string> used;
  for (const auto& it : tree.items()) {
    names_.push_back(it.name);
    std::string code;
    do {
      code.clear();
      for (int k = 0; k < 3; ++k) code += static_cast<char>('A' + uniform_index(rng, 26));
    } while (!used.insert(code).second);
    codes_.push_back(code);
  }
}

const std::string& LabelSet::label(ItemId id, Condition c) const {
  return c == Condition::Semantic ? names_.at(id) : codes_.at(id);
}

json to_json(const PlayerView& v) {
  json inv = json::array();
  for (const auto& it : v.inventory) inv.push_back({{"id", it.id}, {"label", it.label}});
  json board = json::array();
  for (const auto& e : v.scoreboard) board.push_back({{"player", e.player}, {"bot", e.bot}, {"score", e.score}});
  return {{"session", v.session},   {"player", v.player},   {"condition", to_string(v.condition)},
          {"mode", to_string(v.mode)}, {"inventory", inv},   {"score", v.score},
          {"bonus", v.bonus},       {"scoreboard", board},  {"remaining", v.remaining},
          {"started", v.started},   {"expired", v.expired}};
}

Session::Session(std::string id, const TaskTree& tree, const LabelSet& labels, Condition condition, PlayMode mode,
                 std::uint64_t seed, const SessionOptions& options)
    : id_(std::move(id)),
      tree_(&tree),
      labels_(&labels),
      condition_(condition),
      mode_(mode),
      options_(options),
      rng_(make_stream(seed, 0)) {
  if (options.humans < 1) throw SessionError(SessionError::Code::Invalid, "a session needs at least one human player");
  if (options.bots < 0) throw SessionError(SessionError::Code::Invalid, "bot count must be non-negative");
  if (!(options.duration > 0)) throw SessionError(SessionError::Code::Invalid, "duration must be positive");
  if (!(options.bot_cadence > 0)) throw SessionError(SessionError::Code::Invalid, "bot cadence must be positive");
  if (!(options.score_base > 1)) throw SessionError(SessionError::Code::Invalid, "score base must exceed 1");
  if (mode == PlayMode::Individual && options.humans != 1) {
    throw SessionError(SessionError::Code::Invalid, "individual sessions have exactly one player");
  }
  const int bots = mode == PlayMode::Group ? options.bots : 0;
  options_.bots = bots;
  for (int i = 0; i < options.humans + bots; ++i) {
    SessionPlayer p;
    p.id = i;
    p.bot = i >= options.humans;
    p.inventory = Inventory(tree.size(), tree.basic_items());
    players_.push_back(std::move(p));
  }
}

double Session::elapsed(double now) const {
  if (!start_) return 0;
  return std::max(0.0, now - *start_);
}

double Session::remaining(double now) const { return std::max(0.0, options_.duration - elapsed(now)); }

bool Session::expired(double now) const { return start_ && elapsed(now) >= options_.duration; }

void Session::start_clock(double now) {
  if (!start_) start_ = now;
}

const SessionPlayer& Session::player_at(int player) const {
  if (player < 0 || player >= static_cast<int>(players_.size())) {
    throw SessionError(SessionError::Code::NotFound, "no player " + std::to_string(player));
  }
  return players_[static_cast<std::size_t>(player)];
}

SessionPlayer& Session::human(int player) {
  const auto& p = player_at(player);
  if (p.bot) throw SessionError(SessionError::Code::Invalid, "player " + std::to_string(player) + " is a bot");
  return players_[static_cast<std::size_t>(player)];
}

std::vector<ItemView> Session::labelled(std::span<const ItemId> ids) const {
  std::vector<ItemView> out;
  out.reserve(ids.size());
  for (ItemId id : ids) out.push_back({id, label(id)});
  return out;
}

PlayerView Session::view(int player, double now) const {
  const auto& p = player_at(player);
  PlayerView v;
  v.session = id_;
  v.player = player;
  v.condition = condition_;
  v.mode = mode_;
  v.inventory = labelled(p.inventory.items());
  v.score = p.score;
  v.bonus = static_cast<double>(p.score) * options_.bonus_rate;
  if (mode_ == PlayMode::Group) {
    for (const auto& q : players_) v.scoreboard.push_back({q.id, q.bot, q.score});
    std::stable_sort(v.scoreboard.begin(), v.scoreboard.end(),
                     [](const ScoreEntry& a, const ScoreEntry& b) { return a.score > b.score; });
  } else {
    v.scoreboard.push_back({p.id, false, p.score});
  }
  v.remaining = remaining(now);
  v.started = start_.has_value();
  v.expired = expired(now);
  return v;
}

AttemptEvent Session::submit_attempt(int player, std::span<const ItemId> items, double now) {
  auto& p = human(player);
  if (expired(now)) throw SessionError(SessionError::Code::Expired, "session expired");
  if (items.empty() || items.size() > Combination::kMaxSize) {
    throw SessionError(SessionError::Code::Invalid, "a combination holds 1 to 3 items, got " + std::to_string(items.size()));
  }
  for (ItemId id : items) {
    if (!p.inventory.contains(id)) throw SessionError(SessionError::Code::Invalid, "item " + std::to_string(id) + " is not owned");
  }
  advance_bots(now);
  start_clock(now);
  const Combination c(items);
  AttemptEvent ev;
  ev.t = elapsed(now);
  ev.actor_id = p.id;
  ev.kind = EventKind::Attempt;
  ev.combination = c.to_vector();
  ev.state_hash = p.inventory.state_hash();
  ev.outcome = resolve_attempt(*tree_, c);
  ev.repeated = !p.attempt_memory.insert(c).second;
  if (ev.outcome && p.inventory.add(*ev.outcome)) p.score += item_score(*tree_, *ev.outcome, options_.score_base);
  ev.score_after = p.score;
  log_.push_back(ev);
  return ev;
}

std::vector<ItemView> Session::inspect_player(int player, int target, double now) {
  auto& p = human(player);
  if (mode_ != PlayMode::Group) throw SessionError(SessionError::Code::WrongMode, "inspection needs a group session");
  if (target == player) throw SessionError(SessionError::Code::Invalid, "cannot inspect yourself");
  const auto& q = player_at(target);
  if (expired(now)) throw SessionError(SessionError::Code::Expired, "session expired");
  advance_bots(now);
  start_clock(now);
  std::vector<ItemId> discovered;
  for (ItemId id : q.inventory.items()) {
    if (tree_->item(id).level > 0) discovered.push_back(id);
  }
  AttemptEvent ev;
  ev.t = elapsed(now);
  ev.actor_id = p.id;
  ev.kind = EventKind::Inspect;
  ev.state_hash = p.inventory.state_hash();
  ev.score_after = p.score;
  ev.target = target;
  ev.target_score = q.score;
  log_.push_back(ev);
  return labelled(discovered);
}

std::vector<ItemView> Session::inspect_item_recipe(int player, int target, ItemId item, double now) {
  auto& p = human(player);
  if (mode_ != PlayMode::Group) throw SessionError(SessionError::Code::WrongMode, "recipe viewing needs a group session");
  const auto& q = player_at(target);
  if (!q.inventory.contains(item)) {
    throw SessionError(SessionError::Code::Invalid, "player " + std::to_string(target) + " does not own item " + std::to_string(item));
  }
  if (expired(now)) throw SessionError(SessionError::Code::Expired, "session expired");
  advance_bots(now);
  start_clock(now);
  std::vector<ItemId> ingredients;
  if (auto r = tree_->recipe_for(item)) ingredients = r->to_vector();
  AttemptEvent ev;
  ev.t = elapsed(now);
  ev.actor_id = p.id;
  ev.kind = EventKind::InspectItem;
  ev.state_hash = p.inventory.state_hash();
  ev.score_after = p.score;
  ev.target = target;
  ev.item = item;
  log_.push_back(ev);
  return labelled(ingredients);
}

void Session::bot_step(SessionPlayer& bot, double t) {
  const Inventory* leader_inv = nullptr;
  int leader = -1;
  if (mode_ == PlayMode::Group) {
    for (const auto& q : players_) {
      if (q.id == bot.id) continue;
      if (leader < 0 || q.score > players_[static_cast<std::size_t>(leader)].score) leader = q.id;
    }
    if (leader >= 0) leader_inv = &players_[static_cast<std::size_t>(leader)].inventory;
  }
  AttemptEvent ev;
  ev.t = t;
  ev.actor_id = bot.id;
  ev.state_hash = bot.inventory.state_hash();
  const BotDecision d = bot_choose_action(bot.inventory, leader_inv, rng_);
  if (const auto* copy = std::get_if<BotCopy>(&d)) {
    ev.kind = EventKind::SocialCopy;
    ev.target = leader;
    ev.outcome = copy->item;
    if (auto r = tree_->recipe_for(copy->item)) {
      ev.combination = r->to_vector();
      bot.attempt_memory.insert(*r);
    }
    bot.inventory.add(copy->item);
    bot.score += item_score(*tree_, copy->item, options_.score_base);
  } else {
    const auto& c = std::get<Combination>(d);
    ev.kind = EventKind::Attempt;
    ev.combination = c.to_vector();
    ev.outcome = resolve_attempt(*tree_, c);
    ev.repeated = !bot.attempt_memory.insert(c).second;
    if (ev.outcome && bot.inventory.add(*ev.outcome)) bot.score += item_score(*tree_, *ev.outcome, options_.score_base);
  }
  ev.score_after = bot.score;
  log_.push_back(std::move(ev));
}

std::vector<AttemptEvent> Session::advance_bots(double now) {
  std::vector<AttemptEvent> out;
  if (!start_ || options_.bots == 0) return out;
  const double horizon = std::min(elapsed(now), options_.duration);
  const long due = static_cast<long>(std::floor(horizon / options_.bot_cadence + 1e-9));
  for (; ticks_done_ < due; ++ticks_done_) {
    const double t = static_cast<double>(ticks_done_ + 1) * options_.bot_cadence;
    for (auto& p : players_) {
      if (!p.bot) continue;
      bot_step(p, t);
      out.push_back(log_.back());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct ReplayPlayer {
  ReplayedPlayer state;
  // Tried or copied recipes, which is what the repeated flag is judged against.
  std::unordered_set<Combination, CombinationHash> memory;
  std::unordered_set<Combination, CombinationHash> tried;
};

}  // namespace

ReplayState replay_log(std::span<const AttemptEvent> log, const TaskTree& tree, double score_base) {
  std::map<int, ReplayPlayer> players;
  auto get = [&](int id) -> ReplayPlayer& {
    auto it = players.find(id);
    if (it == players.end()) {
      ReplayPlayer p;
      p.state.inventory = Inventory(tree.size(), tree.basic_items());
      it = players.emplace(id, std::move(p)).first;
    }
    return it->second;
  };
  double last_t = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& e = log[i];
    auto fail = [i](const std::string& what) { throw IntegrityError(i, what); };
    if (e.t < last_t) fail("timestamp goes backwards");
    last_t = e.t;
    auto& p = get(e.actor_id);
    if (e.state_hash != p.state.inventory.state_hash()) fail("state hash does not match the replayed inventory");
    auto check_item = [&](ItemId id) {
      if (!tree.contains(id)) fail("unknown item id " + std::to_string(id));
    };
    switch (e.kind) {
      case EventKind::Attempt: {
        if (e.combination.empty() || e.combination.size() > Combination::kMaxSize) fail("combination size out of range");
        for (ItemId id : e.combination) {
          check_item(id);
          if (!p.state.inventory.contains(id)) fail("attempt uses unowned item " + std::to_string(id));
        }
        const Combination c(std::span<const ItemId>(e.combination));
        if (e.outcome != resolve_attempt(tree, c)) fail("recorded outcome disagrees with the recipe table");
        const bool repeated = !p.memory.insert(c).second;
        if (repeated != e.repeated) fail("repeated flag disagrees with the attempt history");
        ++p.state.attempts;
        p.tried.insert(c);
        p.state.unique_attempts = p.tried.size();
        if (e.outcome && p.state.inventory.add(*e.outcome)) p.state.score += item_score(tree, *e.outcome, score_base);
        break;
      }
      case EventKind::SocialCopy: {
        if (!e.outcome) fail("copy event without an item");
        check_item(*e.outcome);
        if (!e.target) fail("copy event without a demonstrator");
        if (*e.target == e.actor_id) fail("copy from self");
        const auto& demo = get(*e.target);
        if (!demo.state.inventory.contains(*e.outcome)) fail("demonstrator does not own the copied item");
        if (p.state.inventory.contains(*e.outcome)) fail("copied item was already owned");
        if (auto r = tree.recipe_for(*e.outcome)) p.memory.insert(*r);
        p.state.inventory.add(*e.outcome);
        p.state.score += item_score(tree, *e.outcome, score_base);
        break;
      }
      case EventKind::SocialNoop:
        break;
      case EventKind::Inspect: {
        if (!e.target || *e.target == e.actor_id) fail("inspect event needs another player as target");
        const auto& q = get(*e.target);
        if (e.target_score && *e.target_score != q.state.score) fail("recorded target score disagrees with replay");
        break;
      }
      case EventKind::InspectItem: {
        if (!e.target || !e.item) fail("recipe view needs a target and an item");
        check_item(*e.item);
        if (!get(*e.target).state.inventory.contains(*e.item)) fail("target does not own the viewed item");
        break;
      }
    }
    if (e.score_after != get(e.actor_id).state.score) fail("recorded score disagrees with replay");
  }
  ReplayState out;
  out.events = log.size();
  for (auto& [id, p] : players) out.players.emplace(id, std::move(p.state));
  return out;
}

// ---------------------------------------------------------------------------

SessionManager::SessionManager(const TaskTree& tree, std::uint64_t deployment_seed, std::size_t capacity, Clock clock)
    : tree_(&tree), labels_(tree, deployment_seed), capacity_(capacity), clock_(std::move(clock)) {
  if (!clock_) {
    const auto origin = std::chrono::steady_clock::now();
    clock_ = [origin] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin).count(); };
  }
}

std::string SessionManager::create(Condition condition, PlayMode mode, std::uint64_t seed, const SessionOptions& options) {
  std::lock_guard lock(mutex_);
  if (sessions_.size() >= capacity_) {
    throw SessionError(SessionError::Code::Capacity, "session capacity of " + std::to_string(capacity_) + " reached");
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06zu", ++created_);
  auto session = std::make_shared<Session>(buf, *tree_, labels_, condition, mode, seed, options);
  sessions_.emplace(buf, Entry{std::move(session), std::make_shared<std::mutex>()});
  return buf;
}

SessionManager::Handle SessionManager::acquire(const std::string& id) {
  Entry entry;
  {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw SessionError(SessionError::Code::NotFound, "no session '" + id + "'");
    entry = it->second;
  }
  Handle h{entry.lock, entry.session, std::unique_lock<std::mutex>(*entry.lock)};
  if (!h.session->advance_bots(clock_()).empty()) notify();
  return h;
}

std::vector<std::string> SessionManager::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, e] : sessions_) out.push_back(id);
  return out;
}

void SessionManager::notify() {
  {
    std::lock_guard lock(change_mutex_);
    ++generation_;
  }
  change_.notify_all();
}

void SessionManager::wait_for_change(double timeout_seconds) {
  std::unique_lock lock(change_mutex_);
  const auto seen = generation_;
  change_.wait_for(lock, std::chrono::duration<double>(timeout_seconds), [&] { return generation_ != seen; });
}

}  // namespace cce
