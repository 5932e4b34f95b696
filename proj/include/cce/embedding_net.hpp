#pragma once

// Skip-gram style semantic memory: one-hot item -> embedding -> ReLU hidden
// layer -> softmax over the vocabulary. No bias terms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cce/combination.hpp"
#include "cce/rng.hpp"

namespace cce {

struct TrainingPair {
  ItemId input = 0;
  ItemId target = 0;
  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

enum class PredictMode { Sample, Argmax };

template <typename Scalar_ = double>
class EmbeddingNet {
 public:
  using Scalar = Scalar_;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Index = Eigen::Index;

  EmbeddingNet() = default;
  /// Zero-initialized network.
  EmbeddingNet(Index vocab_size, Index embed_dim, Index hidden_dim)
      : embeddings_(Matrix::Zero(vocab_size, embed_dim)),
        w1_(Matrix::Zero(embed_dim, hidden_dim)),
        w2_(Matrix::Zero(hidden_dim, vocab_size)) {
    if (vocab_size < 1 || embed_dim < 1 || hidden_dim < 1) {
      throw std::invalid_argument("embedding net dimensions must be at least 1");
    }
  }

  Index vocab_size() const { return embeddings_.rows(); }
  Index embed_dim() const { return embeddings_.cols(); }
  Index hidden_dim() const { return w1_.cols(); }

  /// vocab_size x embed_dim; row i is item i's representation.
  const Matrix& embeddings() const { return embeddings_; }
  Matrix& embeddings() { return embeddings_; }
  /// embed_dim x hidden_dim.
  const Matrix& w1() const { return w1_; }
  Matrix& w1() { return w1_; }
  /// hidden_dim x vocab_size.
  const Matrix& w2() const { return w2_; }
  Matrix& w2() { return w2_; }

  bool all_finite() const { return embeddings_.allFinite() && w1_.allFinite() && w2_.allFinite(); }

  friend bool operator==(const EmbeddingNet& a, const EmbeddingNet& b) {
    return a.embeddings_ == b.embeddings_ && a.w1_ == b.w1_ && a.w2_ == b.w2_;
  }

 private:
  Matrix embeddings_;
  Matrix w1_;
  Matrix w2_;
};

using EmbeddingNetd = EmbeddingNet<double>;
using EmbeddingNetf = EmbeddingNet<float>;

template <typename Scalar>
using SimilarityMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Weights i.i.d. uniform in [-0.1, 0.1], deterministic in `seed`.
template <typename Scalar = double>
EmbeddingNet<Scalar> init_net(Eigen::Index vocab_size, Eigen::Index embed_dim, Eigen::Index hidden_dim,
                              std::uint64_t seed) {
  EmbeddingNet<Scalar> net(vocab_size, embed_dim, hidden_dim);
  Rng rng = make_stream(seed, 0xe1b0ULL);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  auto fill = [&](auto& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = static_cast<Scalar>(u(rng));
  };
  fill(net.embeddings());
  fill(net.w1());
  fill(net.w2());
  return net;
}

namespace detail {

template <typename Scalar>
void check_id(const EmbeddingNet<Scalar>& net, ItemId x) {
  if (static_cast<Eigen::Index>(x) >= net.vocab_size()) {
    throw std::out_of_range("item id " + std::to_string(x) + " outside network vocabulary of " +
                            std::to_string(net.vocab_size()));
  }
}

template <typename Derived>
void softmax_inplace(Eigen::MatrixBase<Derived>& z) {
  z.array() -= z.maxCoeff();
  z = z.array().exp().matrix();
  z /= z.sum();
}

}  // namespace detail

/// Intermediate activations of one forward pass, kept for backpropagation.
template <typename Scalar>
struct ForwardPass {
  typename EmbeddingNet<Scalar>::Vector pre;     // W1^T e
  typename EmbeddingNet<Scalar>::Vector hidden;  // ReLU(pre)
  typename EmbeddingNet<Scalar>::Vector probs;   // softmax(W2^T h)
};

template <typename Scalar>
ForwardPass<Scalar> forward_pass(const EmbeddingNet<Scalar>& net, ItemId x) {
  detail::check_id(net, x);
  ForwardPass<Scalar> fp;
  fp.pre.noalias() = net.w1().transpose() * net.embeddings().row(x).transpose();
  fp.hidden = fp.pre.cwiseMax(Scalar(0));
  fp.probs.noalias() = net.w2().transpose() * fp.hidden;
  detail::softmax_inplace(fp.probs);
  return fp;
}

/// p(y | x) over the whole vocabulary.
template <typename Scalar>
typename EmbeddingNet<Scalar>::Vector forward(const EmbeddingNet<Scalar>& net, ItemId x) {
  return forward_pass(net, x).probs;
}

/// Gradient of the cross-entropy loss for one pair, laid out like the net.
template <typename Scalar>
struct NetGradient {
  typename EmbeddingNet<Scalar>::Vector embedding_row;  // d/dE[input]
  typename EmbeddingNet<Scalar>::Matrix w1;
  typename EmbeddingNet<Scalar>::Matrix w2;
};

template <typename Scalar>
Scalar cross_entropy(const EmbeddingNet<Scalar>& net, const TrainingPair& pair) {
  detail::check_id(net, pair.target);
  return -std::log(forward(net, pair.input)(pair.target));
}

/// Loss and analytic gradient for (input -> target).
template <typename Scalar>
Scalar loss_and_gradient(const EmbeddingNet<Scalar>& net, const TrainingPair& pair, NetGradient<Scalar>& grad) {
  detail::check_id(net, pair.target);
  const auto fp = forward_pass(net, pair.input);
  const Scalar loss = -std::log(fp.probs(pair.target));

  typename EmbeddingNet<Scalar>::Vector dz = fp.probs;
  dz(pair.target) -= Scalar(1);
  grad.w2.noalias() = fp.hidden * dz.transpose();
  typename EmbeddingNet<Scalar>::Vector dpre = net.w2() * dz;
  dpre = (fp.pre.array() > Scalar(0)).select(dpre, Scalar(0));
  grad.w1.noalias() = net.embeddings().row(pair.input).transpose() * dpre.transpose();
  grad.embedding_row.noalias() = net.w1() * dpre;
  return loss;
}

/// One SGD update on a single pair; returns the loss before the update.
template <typename Scalar>
Scalar sgd_step(EmbeddingNet<Scalar>& net, const TrainingPair& pair, Scalar learning_rate, NetGradient<Scalar>& scratch) {
  const Scalar loss = loss_and_gradient(net, pair, scratch);
  net.w2() -= learning_rate * scratch.w2;
  net.w1() -= learning_rate * scratch.w1;
  net.embeddings().row(pair.input) -= learning_rate * scratch.embedding_row.transpose();
  return loss;
}

/// Per-pair SGD over `pairs` for `epochs` passes, in order. Returns the mean
/// pre-update cross-entropy of each epoch.
template <typename Scalar>
std::vector<Scalar> train(EmbeddingNet<Scalar>& net, std::span<const TrainingPair> pairs, int epochs, Scalar learning_rate) {
  if (pairs.empty()) throw std::invalid_argument("training needs at least one pair");
  if (!(learning_rate >= Scalar(0))) throw std::invalid_argument("learning rate must be non-negative");
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  std::vector<Scalar> trace;
  trace.reserve(static_cast<std::size_t>(epochs));
  NetGradient<Scalar> scratch;
  for (int e = 0; e < epochs; ++e) {
    Scalar total = 0;
    for (const auto& p : pairs) total += sgd_step(net, p, learning_rate, scratch);
    trace.push_back(total / static_cast<Scalar>(pairs.size()));
  }
  return trace;
}

/// Ordered (ingredient -> co-ingredient) pairs over distinct positions. The
/// product joins as an extra context word only when `include_product` is set.
std::vector<TrainingPair> pairs_from_combination(const Combination& c, std::optional<ItemId> product = std::nullopt,
                                                 bool include_product = false);

/// Partner for `x` among `candidates`, from p(. | x) restricted and renormalized.
template <typename Scalar>
ItemId predict_partner(const EmbeddingNet<Scalar>& net, ItemId x, std::span<const ItemId> candidates, PredictMode mode,
                       Rng& rng) {
  if (candidates.empty()) throw std::invalid_argument("predict_partner needs candidates");
  if (candidates.size() == 1) {
    detail::check_id(net, candidates[0]);
    return candidates[0];
  }
  const auto fp = forward_pass(net, x);
  if (mode == PredictMode::Argmax) {
    ItemId best = candidates[0];
    detail::check_id(net, best);
    for (ItemId c : candidates) {
      detail::check_id(net, c);
      const Scalar pc = fp.probs(c), pb = fp.probs(best);
      if (pc > pb || (pc == pb && c < best)) best = c;
    }
    return best;
  }
  // Restricted softmax, recomputed from logits so tiny probabilities keep their ratios.
  std::vector<double> weights(candidates.size());
  const typename EmbeddingNet<Scalar>::Vector logits = net.w2().transpose() * fp.hidden;
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    detail::check_id(net, candidates[i]);
    max_logit = std::max(max_logit, static_cast<double>(logits(candidates[i])));
  }
  double total = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    weights[i] = std::exp(static_cast<double>(logits(candidates[i])) - max_logit);
    total += weights[i];
  }
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    u -= weights[i];
    if (u < 0) return candidates[i];
  }
  return candidates.back();
}

/// Cosine similarity of two embedding rows; 0 when either has zero norm.
template <typename DerivedA, typename DerivedB>
auto cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar na = a.norm(), nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return std::clamp(a.dot(b) / (na * nb), Scalar(-1), Scalar(1));
}

template <typename Scalar>
Scalar similarity(const EmbeddingNet<Scalar>& net, ItemId i, ItemId j) {
  detail::check_id(net, i);
  detail::check_id(net, j);
  return cosine(net.embeddings().row(i), net.embeddings().row(j));
}

/// Copy with i.i.d. N(0, sd^2) noise on every weight.
template <typename Scalar>
EmbeddingNet<Scalar> perturb_net(const EmbeddingNet<Scalar>& net, double sd, Rng& rng) {
  if (!(sd >= 0)) throw std::invalid_argument("perturbation sd must be non-negative");
  EmbeddingNet<Scalar> out = net;
  if (sd == 0) return out;
  std::normal_distribution<double> noise(0.0, sd);
  auto jitter = [&](auto& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) += static_cast<Scalar>(noise(rng));
  };
  jitter(out.embeddings());
  jitter(out.w1());
  jitter(out.w2());
  return out;
}

/// Full pairwise cosine matrix; zero-norm rows get 0 off-diagonal and 1 on the diagonal.
template <typename Scalar>
SimilarityMatrix<Scalar> export_similarity_matrix(const EmbeddingNet<Scalar>& net) {
  const auto& e = net.embeddings();
  const Eigen::Index n = e.rows();
  typename EmbeddingNet<Scalar>::Vector norms = e.rowwise().norm();
  SimilarityMatrix<Scalar> s = e * e.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar d = norms(i) * norms(j);
      s(i, j) = d == Scalar(0) ? Scalar(0) : std::clamp(s(i, j) / d, Scalar(-1), Scalar(1));
    }
    s(i, i) = Scalar(1);
  }
  // Exact symmetry regardless of summation order.
  s = ((s + s.transpose()) / Scalar(2)).eval();
  return s;
}

}  // namespace cce
