#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "cce/agent.hpp"
#include "cce/metrics.hpp"

using namespace cce;

namespace {

AttemptEvent attempt(int actor, std::vector<ItemId> items, std::optional<ItemId> outcome = std::nullopt, std::uint64_t state = 0) {
  AttemptEvent e;
  e.actor_id = actor;
  e.combination = std::move(items);
  e.outcome = outcome;
  e.state_hash = state;
  return e;
}

// Basics 0..5; items 6, 7, 8 are made from {0,1}, {0,2}, {0,3}.
TaskTree tiny_tree() {
  std::vector<Item> items;
  for (ItemId i = 0; i < 6; ++i) items.push_back({i, "b" + std::to_string(i), 0});
  for (ItemId i = 6; i < 9; ++i) items.push_back({i, "x" + std::to_string(i), 1});
  std::vector<Recipe> recipes{{Combination{0, 1}, 6}, {Combination{0, 2}, 7}, {Combination{0, 3}, 8}};
  return TaskTree(items, recipes, {6, 3});
}

// Average ranks by counting, O(n^2), written separately from the library.
std::vector<double> oracle_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

double oracle_spearman(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  std::vector<double> xa, xb;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
      xa.push_back(a(i, j));
      xb.push_back(b(i, j));
    }
  const auto ra = oracle_ranks(xa), rb = oracle_ranks(xb);
  const double n = static_cast<double>(ra.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Eigen::MatrixXd random_symmetric(Eigen::Index n, Rng& rng, int levels = 0) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double v = uniform01(rng) * 2 - 1;
      if (levels > 0) v = std::round(v * levels) / levels;  // force ties
      m(i, j) = m(j, i) = v;
    }
  return m;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("entropy of simple distributions") {
  const std::vector<std::size_t> one{7};
  CHECK(entropy_nats(one) == 0.0);
  const std::vector<std::size_t> four{5, 5, 5, 5};
  CHECK(entropy_nats(four) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(entropy_nats(std::vector<std::size_t>{}) == 0.0);
}

TEST_CASE("entropy by state matches a histogram oracle") {
  const auto& t = default_task_tree();
  Rng rng = make_stream(8, 8);
  const std::vector<ItemId> items(t.basic_items().begin(), t.basic_items().end());
  std::vector<AttemptEvent> log;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t state = 100 + uniform_index(rng, 7);
    // Skewed draws so states differ in spread.
    const auto c = random_combination(std::span<const ItemId>(items.data(), 1 + state % 6), rng);
    log.push_back(attempt(static_cast<int>(uniform_index(rng, 3)), c.to_vector(), std::nullopt, state));
    if (i % 50 == 0) {
      AttemptEvent noop;
      noop.kind = EventKind::SocialNoop;
      noop.state_hash = state;
      log.push_back(noop);
    }
  }
  const auto got = entropy_by_state(log, t);

  std::map<std::uint64_t, std::map<std::vector<ItemId>, std::size_t>> hist;
  for (const auto& e : log) {
    if (e.kind != EventKind::Attempt) continue;
    auto v = e.combination;
    std::sort(v.begin(), v.end());
    hist[e.state_hash][v]++;
  }
  REQUIRE(got.size() == hist.size());
  for (const auto& [state, h] : hist) {
    std::vector<std::size_t> counts;
    std::size_t total = 0;
    for (const auto& [c, n] : h) {
      counts.push_back(n);
      total += n;
    }
    std::sort(counts.rbegin(), counts.rend());
    double expected = 0;
    for (auto n : counts) {
      const double p = static_cast<double>(n) / static_cast<double>(total);
      expected -= p * std::log(p);
    }
    const auto& s = got.at(state);
    CHECK(s.entropy == expected);
    CHECK(s.attempts == total);
    CHECK(s.distinct == h.size());
    CHECK(s.entropy >= 0);
    CHECK(s.entropy <= std::log(static_cast<double>(h.size())) + 1e-12);
  }
}

TEST_CASE("entropy degenerate and uniform states") {
  const auto& t = default_task_tree();
  std::vector<AttemptEvent> log;
  for (int i = 0; i < 10; ++i) log.push_back(attempt(0, {0, 1}, std::nullopt, 1));
  for (ItemId i = 0; i < 5; ++i)
    for (int r = 0; r < 3; ++r) log.push_back(attempt(1, {i}, std::nullopt, 2));
  const auto got = entropy_by_state(log, t);
  CHECK(got.at(1).entropy == 0.0);
  CHECK(got.at(2).entropy == doctest::Approx(std::log(5.0)).epsilon(1e-14));
  CHECK(got.at(1).inventory_size == 6);
  const auto csv = entropy_csv(got);
  CHECK(csv.rfind("state_hash,inventory_size,attempts,distinct,entropy\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("unique actions") {
  const auto& t = default_task_tree();
  const Inventory basics(t.size(), t.basic_items());
  const auto h = basics.state_hash();
  std::vector<AttemptEvent> single{attempt(0, {0, 1}, std::nullopt, h)};
  auto rows = unique_actions_by_state(single, t);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].unique_cumulative == 1);
  CHECK(rows[0].normalized == doctest::Approx(1.0 / 6));

  std::vector<AttemptEvent> repeat(100, attempt(0, {2, 3}, std::nullopt, h));
  rows = unique_actions_by_state(repeat, t);
  CHECK(rows[0].unique_cumulative == 1);
}

TEST_CASE("unique actions accumulate across states") {
  const auto& t = tiny_tree();
  std::vector<AttemptEvent> log{attempt(0, {4}, std::nullopt, 1), attempt(0, {0, 1}, 6, 1), attempt(0, {4}, std::nullopt, 2),
                                attempt(0, {5}, std::nullopt, 2)};
  const auto rows = unique_actions_by_state(log, t);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].unique_cumulative == 2);
  CHECK(rows[0].inventory_size == 6);
  CHECK(rows[1].unique_cumulative == 3);
  CHECK(rows[1].inventory_size == 7);
  CHECK(rows[1].normalized == doctest::Approx(3.0 / 7));
  CHECK(unique_actions_csv(rows).find("actor,state_hash") == 0);
}

TEST_CASE("random bot exhausts the 83 actions of a 6-item state") {
  const auto& t = default_task_tree();
  const Inventory inv(t.size(), t.basic_items());
  const std::vector<ItemId> items(t.basic_items().begin(), t.basic_items().end());
  // Exact per-action probabilities of the bot's sampler, then the
  // coupon-collector expectation sum_c 1 - (1 - p_c)^m.
  std::map<Combination, double> p;
  for (ItemId a : items) {
    p[Combination{a}] += 1.0 / 18;
    for (ItemId b : items) {
      p[Combination{a, b}] += 1.0 / 108;
      for (ItemId c : items) p[Combination{a, b, c}] += 1.0 / 648;
    }
  }
  auto expected_unique = [&](int m) {
    double s = 0;
    for (const auto& [c, q] : p) s += 1 - std::pow(1 - q, m);
    return s;
  };
  auto simulate = [&](int m, std::uint64_t seed) {
    Rng rng = make_stream(seed, 0);
    std::vector<AttemptEvent> log;
    for (int i = 0; i < m; ++i) {
      log.push_back(attempt(0, std::get<Combination>(bot_choose_action(inv, nullptr, rng)).to_vector(), std::nullopt, inv.state_hash()));
    }
    return unique_actions_by_state(log, t).back().unique_cumulative;
  };
  CHECK(simulate(10000, 1) == 83);
  CHECK(expected_unique(10000) > 82.99);
  double mean = 0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) mean += static_cast<double>(simulate(150, 100 + r)) / runs;
  CHECK(std::abs(mean - expected_unique(150)) < 1.0);
}

TEST_CASE("repertoire from logs") {
  const auto& t = tiny_tree();
  std::vector<AttemptEvent> log{attempt(0, {0, 1}, 6), attempt(1, {0, 4}), attempt(1, {0, 1}, 6)};
  AttemptEvent copy;
  copy.kind = EventKind::SocialCopy;
  copy.actor_id = 2;
  copy.outcome = 7;
  log.push_back(copy);
  const auto s = repertoire_series(log, t);
  REQUIRE(s.size() == 5);
  CHECK(s[0].cumulative == 6);
  CHECK(s[1].cumulative == 7);
  CHECK(s[3].cumulative == 7);
  CHECK(s[4].cumulative == 8);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].cumulative >= s[i - 1].cumulative);
}

TEST_CASE("repertoire and strategy proportions of a simulation") {
  SimConfig cfg;
  cfg.population_size = 12;
  cfg.generations = 6;
  cfg.strategy_mix = {0.25, 0.25, 0.25, 0.25};
  cfg.embed_dim = cfg.hidden_dim = 4;
  const auto traj = run_simulation(cfg).front();
  const auto s = repertoire_series(traj);
  CHECK(s.front().instant == 6);
  CHECK(s.front().cumulative == 6);
  for (std::size_t i = 1; i < s.size(); ++i) {
    CHECK(s[i].cumulative >= s[i - 1].cumulative);
    CHECK(s[i].cumulative <= 184);
  }
  for (const auto& p : strategy_proportions(traj)) CHECK(std::abs(p[0] + p[1] + p[2] + p[3] - 1.0) < 1e-12);

  cfg.strategy_mix = {0, 0, 1, 0};
  for (const auto& p : strategy_proportions(run_simulation(cfg).front())) CHECK(p[2] == 1.0);
}

TEST_CASE("consecutive similarity fixture") {
  Eigen::MatrixXd s(4, 4);
  s << 1, .5, .2, 0, .5, 1, .3, .1, .2, .3, 1, .6, 0, .1, .6, 1;
  const std::vector<AttemptEvent> log{attempt(0, {0, 1}), attempt(0, {0, 1}, 7), attempt(1, {2, 3}), attempt(0, {2}),
                                      attempt(1, {0, 3})};
  const auto rows = consecutive_similarity(log, s);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].actor == 0);
  CHECK(rows[0].attempt_index == 2);
  CHECK_FALSE(rows[0].prior_success);
  CHECK(rows[0].similarity == doctest::Approx(1.0));
  CHECK(rows[1].actor == 0);
  CHECK(rows[1].attempt_index == 3);
  CHECK(rows[1].prior_success);
  CHECK(rows[1].similarity == doctest::Approx(0.3));
  CHECK(rows[2].actor == 1);
  CHECK(rows[2].attempt_index == 2);
  CHECK(rows[2].similarity == doctest::Approx(0.6));

  const std::vector<AttemptEvent> orth{attempt(0, {0, 1}), attempt(0, {2, 3})};
  CHECK(consecutive_similarity(orth, Eigen::MatrixXd::Identity(4, 4))[0].similarity == 0.0);
  CHECK_THROWS(consecutive_similarity(std::vector<AttemptEvent>{attempt(0, {0}), attempt(0, {9})}, s));
  CHECK(consecutive_csv(rows).find("actor,attempt_index,prior_success,similarity\n0,2,0,1\n") == 0);
}

TEST_CASE("uncertainty bonus table") {
  struct Row {
    std::size_t T, te;
    double value;
  };
  // sqrt(ln T / (t_e + 1)), evaluated independently in double precision.
  const std::vector<Row> table{
      {1, 0, 0},
      {2, 0, 0.83255461115769769},
      {2, 1, 0.58870501125773733},
      {100, 9, 0.67861404244151124},
      {10, 0, 1.5174271293851465},
      {10, 3, 0.75871356469257323},
      {50, 49, 0.27971496225365372},
      {7, 2, 0.80537985842195681},
      {1000, 10, 0.79245047330084906},
      {3, 2, 0.60514799530586172},
      {500, 123, 0.22387006777445764},
      {20, 5, 0.70660364580081136},
      {64, 7, 0.72101344330044148},
      {12, 11, 0.45505555061882286},
      {250, 0, 2.3497789082937666},
      {33, 16, 0.45351616881912954},
      {5, 1, 0.89706128899705073},
      {99, 98, 0.21544222432374188},
      {4096, 63, 0.36050672165022074},
      {17, 4, 0.75275671289683177},
  };
  for (const auto& r : table) CHECK(uncertainty_bonus(r.T, r.te) == doctest::Approx(r.value).epsilon(1e-14));
  CHECK_THROWS(uncertainty_bonus(0, 0));
}

TEST_CASE("raw features follow their definitions") {
  const auto t = tiny_tree();
  // Actor 0: {0,1} succeeds, then {4,5} twice, then {0,0}. Item 0 sits in
  // three recipes and one has been discovered.
  const std::vector<AttemptEvent> log{attempt(0, {0, 1}, 6), attempt(0, {4, 5}), attempt(0, {4, 5}), attempt(0, {0, 0})};
  Rng rng = make_stream(1, 1);
  const auto rows = behavioral_feature_table(log, t, FeatureSources{}, 0, rng, false);
  REQUIRE(rows.size() == 4);
  const auto& last = rows.back();
  CHECK(last.attempt_index == 4);
  CHECK(last.combination == Combination{0, 0});
  CHECK(last.features[9] == 2.0);                                   // empowerment 3 - 1
  CHECK(last.features[6] == doctest::Approx(uncertainty_bonus(4, 1)));  // selected once before
  CHECK(last.features[7] == 3.0);                                   // last used at attempt 1
  CHECK(last.features[8] == 1.0);                                   // one prior success
  CHECK(last.features[4] == 2.0);
  CHECK(last.features[5] == 0.0);
  CHECK(last.features[3] == 1.0);  // display slot of item 0
  CHECK(std::isnan(last.features[0]));

  const auto& second = rows[1];
  CHECK(second.combination == Combination{4, 5});
  CHECK(second.features[7] == 2.0);  // never selected: T
  CHECK(second.features[8] == 0.0);
  CHECK(second.features[6] == doctest::Approx(std::sqrt(std::log(2.0))));

  // Position of the product, which joined the inventory seventh.
  const std::vector<AttemptEvent> log2{attempt(0, {0, 1}, 6), attempt(0, {6, 6})};
  const auto rows2 = behavioral_feature_table(log2, t, FeatureSources{}, 0, rng, false);
  CHECK(rows2.back().features[3] == 7.0);
  CHECK(rows2.back().features[5] == 2.0);
}

TEST_CASE("social copies count as discovered recipes") {
  const auto t = tiny_tree();
  AttemptEvent copy;
  copy.kind = EventKind::SocialCopy;
  copy.outcome = 7;  // recipe {0,2}
  const std::vector<AttemptEvent> log{copy, attempt(0, {0, 0})};
  Rng rng = make_stream(1, 1);
  const auto rows = behavioral_feature_table(log, t, FeatureSources{}, 0, rng, false);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].features[9] == 2.0);
  CHECK(rows[0].attempt_index == 1);
}

TEST_CASE("feature table properties") {
  const auto& t = default_task_tree();
  SimConfig cfg;
  cfg.population_size = 10;
  cfg.generations = 10;
  cfg.strategy_mix = {0.5, 0, 0.5, 0};
  cfg.embed_dim = cfg.hidden_dim = 4;
  const auto traj = run_simulation(cfg).front();
  std::vector<AttemptEvent> log;
  for (const auto& r : traj.records) log.insert(log.end(), r.actions.begin(), r.actions.end());
  // action_log_generations covers the whole run, so actors start from basics.
  REQUIRE(traj.records[1].actions.size() > 0);

  Rng srng = make_stream(2, 2);
  const Eigen::MatrixXd sem = random_symmetric(184, srng);
  FeatureSources src;
  src.semantic = &sem;
  Rng rng = make_stream(5, 5);
  const std::size_t k = 10;
  const auto rows = behavioral_feature_table(log, t, src, k, rng);
  REQUIRE(!rows.empty());

  std::map<std::pair<int, std::size_t>, std::vector<const FeatureRow*>> groups;
  for (const auto& r : rows) groups[{r.actor, r.attempt_index}].push_back(&r);
  for (const auto& [key, g] : groups) {
    REQUIRE(g.front()->is_actual);
    CHECK(g.front()->combination.size() >= 2);
    CHECK(g.size() == k + 1);
    std::set<Combination> seen;
    for (const auto* r : g) {
      CHECK(seen.insert(r->combination).second);
      CHECK(r->combination.size() >= 2);
    }
    for (std::size_t i = 1; i < g.size(); ++i) CHECK_FALSE(g[i]->is_actual);
  }

  std::map<int, std::vector<const FeatureRow*>> by_actor;
  for (const auto& r : rows) by_actor[r.actor].push_back(&r);
  for (const auto& [actor, rs] : by_actor) {
    for (std::size_t f = 0; f < kFeatureNames.size(); ++f) {
      if (f == 1 || f == 2) {
        // no structural or color source given
        for (const auto* r : rs) CHECK(std::isnan(r->features[f]));
        continue;
      }
      double mean = 0, var = 0;
      std::set<double> distinct;
      for (const auto* r : rs) {
        mean += r->features[f];
        distinct.insert(r->features[f]);
      }
      mean /= static_cast<double>(rs.size());
      for (const auto* r : rs) var += (r->features[f] - mean) * (r->features[f] - mean);
      var /= static_cast<double>(rs.size());
      CHECK(std::abs(mean) < 1e-9);
      if (distinct.size() >= 2) CHECK(std::abs(var - 1.0) < 1e-9);
      else CHECK(var == 0.0);
    }
  }
  const auto csv = feature_table_csv(rows);
  CHECK(csv.rfind("actor,attempt_index,is_actual,combination,semantic_similarity,structural_similarity,color_similarity,position,"
                  "n_items,reward,uncertainty,recency,success,empowerment\n",
                  0) == 0);
  CHECK(csv.find(",NA,") != std::string::npos);
}

TEST_CASE("actual rows belong to the action set of their state") {
  const auto& t = default_task_tree();
  SimConfig cfg;
  cfg.population_size = 6;
  cfg.generations = 3;
  cfg.strategy_mix = {0, 0, 0, 1};
  const auto traj = run_simulation(cfg).front();
  std::vector<AttemptEvent> log;
  for (const auto& r : traj.records) log.insert(log.end(), r.actions.begin(), r.actions.end());
  Rng rng = make_stream(3, 3);
  const auto rows = behavioral_feature_table(log, t, FeatureSources{}, 5, rng, false);
  // Replay inventories independently and check membership.
  std::map<int, Inventory> inv;
  std::map<std::pair<int, std::size_t>, std::set<Combination>> legal;
  std::map<int, std::size_t> T;
  for (const auto& e : log) {
    auto it = inv.try_emplace(e.actor_id, t.size(), t.basic_items()).first;
    if (e.kind != EventKind::Attempt) continue;
    const auto acts = enumerate_actions(it->second);
    legal[{e.actor_id, ++T[e.actor_id]}] = std::set<Combination>(acts.begin(), acts.end());
    if (e.outcome) it->second.add(*e.outcome);
  }
  for (const auto& r : rows) CHECK(legal.at({r.actor, r.attempt_index}).contains(r.combination));
}

TEST_CASE("small inventories enumerate every alternative") {
  const auto t = tiny_tree();
  Rng rng = make_stream(1, 1);
  const std::vector<AttemptEvent> log{attempt(0, {4, 5})};
  // 21 pairs + 56 triples over 6 items, minus the actual one.
  const auto rows = behavioral_feature_table(log, t, FeatureSources{}, 1000, rng, false);
  CHECK(rows.size() == 1 + 76);
}

TEST_CASE("spearman against a rank-then-pearson oracle") {
  Eigen::MatrixXd a(6, 6), b(6, 6);
  a << 1, .2, .5, .1, .9, .3, .2, 1, .4, .4, .7, .6, .5, .4, 1, .8, .2, .2, .1, .4, .8, 1, .35, .05, .9, .7, .2, .35, 1, .55,
      .3, .6, .2, .05, .55, 1;
  b << 1, .1, .6, .3, .8, .2, .1, 1, .5, .5, .9, .4, .6, .5, 1, .7, .1, .3, .3, .5, .7, 1, .25, .15, .8, .9, .1, .25, 1, .65,
      .2, .4, .3, .15, .65, 1;
  // Reference value from an external statistics package.
  CHECK(std::abs(spearman_rho(a, b) - 0.86151218478740987) < 1e-12);
  CHECK(std::abs(spearman_rho(a, b) - oracle_spearman(a, b)) < 1e-12);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_stream(seed, 4);
    const auto x = random_symmetric(15, rng, seed % 2 ? 4 : 0);
    const auto y = random_symmetric(15, rng, seed % 3 ? 0 : 3);
    CHECK(std::abs(spearman_rho(x, y) - oracle_spearman(x, y)) < 1e-12);
  }
}

TEST_CASE("spearman edge cases and monotone invariance") {
  Rng rng = make_stream(9, 9);
  const auto a = random_symmetric(10, rng);
  CHECK(spearman_rho(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spearman_rho(a, Eigen::MatrixXd(-a)) == doctest::Approx(-1.0).epsilon(1e-15));
  const Eigen::MatrixXd cubed = a.array().cube().matrix();
  const Eigen::MatrixXd expd = a.array().exp().matrix();
  const auto b = random_symmetric(10, rng);
  CHECK(spearman_rho(cubed, b) == doctest::Approx(spearman_rho(a, b)).epsilon(1e-12));
  CHECK(spearman_rho(a, expd) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(spearman_rho(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)));
  CHECK_THROWS(spearman_rho(Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Identity(5, 5)));
  CHECK_THROWS(spearman_rho(Eigen::MatrixXd::Identity(4, 4), a.topLeftCorner(4, 4)));
}

TEST_CASE("average ranks") {
  const std::vector<double> v{3, 1, 3, 2};
  CHECK(average_ranks(v) == std::vector<double>{3.5, 1, 3.5, 2});
}

TEST_CASE("type 8 quantiles") {
  const std::vector<double> v{3.1, 1.0, 4.5, 2.2, 9.0, 5.5, 0.5};
  // Reference values from numpy's median_unbiased method.
  CHECK(quantile(v, 0.0) == doctest::Approx(0.5));
  CHECK(quantile(v, 0.1) == doctest::Approx(0.53333333333333333));
  CHECK(quantile(v, 0.25) == doctest::Approx(1.2));
  CHECK(quantile(v, 0.5) == doctest::Approx(3.1));
  CHECK(quantile(v, 0.75) == doctest::Approx(5.333333333333333));
  CHECK(quantile(v, 0.9) == doctest::Approx(8.7666666666666675));
  CHECK(quantile(v, 1.0) == doctest::Approx(9.0));
  CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.4166666666666667));
  CHECK(quantile({4, 2}, 0.5) == 3.0);
  CHECK_THROWS(quantile({}, 0.5));
  CHECK_THROWS(quantile({1}, 1.5));
}

}
