#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cce/combination.hpp"
#include "cce/events.hpp"
#include "cce/evolution.hpp"
#include "cce/rng.hpp"
#include "cce/task_tree.hpp"

namespace cce {

struct RepertoirePoint {
  int step = 0;
  int instant = 0;
  int cumulative = 0;
};

/// Per-generation repertoire of a simulated population.
std::vector<RepertoirePoint> repertoire_series(const Trajectory& t);
/// Group repertoire after each event of a play log (no deaths, so both counts agree).
std::vector<RepertoirePoint> repertoire_series(std::span<const AttemptEvent> log, const TaskTree& tree);

struct StateEntropy {
  double entropy = 0;  // nats
  std::size_t attempts = 0;
  std::size_t distinct = 0;
  std::size_t inventory_size = 0;
};

/// Shannon entropy (natural log) of the empirical distribution of `counts`.
double entropy_nats(std::span<const std::size_t> counts);

/// Attempt events grouped by the actor's inventory-state hash, pooled across actors.
std::map<std::uint64_t, StateEntropy> entropy_by_state(std::span<const AttemptEvent> log, const TaskTree& tree);

struct UniqueActionsRow {
  int actor = 0;
  std::uint64_t state = 0;
  std::size_t inventory_size = 0;
  /// Distinct combinations the actor tried up to and including this state.
  std::size_t unique_cumulative = 0;
  double normalized = 0;
};

/// One row per (actor, visited state), in order of first visit.
std::vector<UniqueActionsRow> unique_actions_by_state(std::span<const AttemptEvent> log, const TaskTree& tree);

/// Per-generation strategy fractions, indexed by Strategy::index().
std::vector<std::array<double, kStrategyCount>> strategy_proportions(const Trajectory& t);

struct ConsecutiveRow {
  int actor = 0;
  /// 1-based ordinal of the later attempt within the actor's attempts.
  std::size_t attempt_index = 0;
  bool prior_success = false;
  double similarity = 0;
};

/// Similarity of each attempt to the actor's preceding attempt: every item of
/// the later attempt is matched to its most similar item in the earlier one
/// and the matches are averaged.
std::vector<ConsecutiveRow> consecutive_similarity(std::span<const AttemptEvent> log, const Eigen::MatrixXd& sim);

inline constexpr std::array<const char*, 10> kFeatureNames{
    "semantic_similarity", "structural_similarity", "color_similarity", "position", "n_items",
    "reward",              "uncertainty",           "recency",          "success",  "empowerment"};

struct FeatureSources {
  const Eigen::MatrixXd* semantic = nullptr;
  const Eigen::MatrixXd* structural = nullptr;
  const Eigen::MatrixXd* color = nullptr;
  double score_base = 2.0;
};

struct FeatureRow {
  int actor = 0;
  std::size_t attempt_index = 0;
  bool is_actual = true;
  Combination combination;
  /// Ordered as kFeatureNames; NaN where a similarity source is absent.
  std::array<double, kFeatureNames.size()> features{};
};

/// sqrt(ln T / (t_e + 1)).
inline double uncertainty_bonus(std::size_t total_attempts, std::size_t times_selected) {
  if (total_attempts == 0) throw std::invalid_argument("uncertainty needs at least one attempt");
  return std::sqrt(std::log(static_cast<double>(total_attempts)) / (static_cast<double>(times_selected) + 1.0));
}

/// Actual multi-item attempts, each followed by up to `k` alternative
/// combinations (size 2 or 3) sampled without replacement from the same
/// inventory. Features are z-normalized per actor over both row kinds unless
/// `normalize` is false.
std::vector<FeatureRow> behavioral_feature_table(std::span<const AttemptEvent> log, const TaskTree& tree,
                                                 const FeatureSources& sources, std::size_t k, Rng& rng,
                                                 bool normalize = true);

std::string feature_table_csv(const std::vector<FeatureRow>& rows);
std::string entropy_csv(const std::map<std::uint64_t, StateEntropy>& entropy);
std::string unique_actions_csv(const std::vector<UniqueActionsRow>& rows);
std::string consecutive_csv(const std::vector<ConsecutiveRow>& rows);

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman correlation of the strictly-upper-triangle entries of two equally
/// sized square matrices.
template <typename DerivedA, typename DerivedB>
double spearman_rho(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument("spearman_rho needs two square matrices of equal size");
  }
  const Eigen::Index n = a.rows();
  if (n < 3) throw std::invalid_argument("spearman_rho needs at least 3 items");
  std::vector<double> xa, xb;
  xa.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  xb.reserve(xa.capacity());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      xa.push_back(static_cast<double>(a(i, j)));
      xb.push_back(static_cast<double>(b(i, j)));
    }
  }
  const auto ra = average_ranks(xa);
  const auto rb = average_ranks(xb);
  const Eigen::Map<const Eigen::VectorXd> va(ra.data(), static_cast<Eigen::Index>(ra.size()));
  const Eigen::Map<const Eigen::VectorXd> vb(rb.data(), static_cast<Eigen::Index>(rb.size()));
  const Eigen::VectorXd ca = va.array() - va.mean();
  const Eigen::VectorXd cb = vb.array() - vb.mean();
  const double denom = ca.norm() * cb.norm();
  if (denom == 0) throw std::invalid_argument("spearman_rho undefined for constant entries");
  return std::clamp(ca.dot(cb) / denom, -1.0, 1.0);
}

/// Median-unbiased (Hyndman-Fan type 8) sample quantile.
double quantile(std::vector<double> values, double p);

}  // namespace cce
