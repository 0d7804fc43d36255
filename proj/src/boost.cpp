// Copyright 2026 The dysarthria-severity Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dys/boost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dys/common.hpp"

namespace dys {
namespace {

constexpr double kMinGain = 1e-12;
// A later candidate must beat the incumbent by a relative margin; exact and
// rounding-level ties therefore go to the lower feature index / threshold.
constexpr double kTieMargin = 1e-12;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

template <typename Node>
int tree_depth(const std::vector<Node>& nodes, std::int32_t at) {
  const Node& n = nodes[static_cast<std::size_t>(at)];
  if (n.is_leaf()) return 0;
  return 1 + std::max(tree_depth(nodes, n.left), tree_depth(nodes, n.right));
}

template <typename Node>
const Node& descend(const std::vector<Node>& nodes, const RowRef& row) {
  std::size_t at = 0;
  while (!nodes[at].is_leaf()) {
    const Node& n = nodes[at];
    at = static_cast<std::size_t>(row(n.feature) < n.threshold ? n.left : n.right);
  }
  return nodes[at];
}

void check_matrix(const Eigen::MatrixXd& x, Eigen::Index rows, const char* who) {
  if (x.rows() == 0 || x.cols() == 0) throw Error(std::string(who) + ": empty feature matrix");
  if (x.rows() != rows) throw Error(std::string(who) + ": feature rows do not match label count");
  if (!x.allFinite()) throw Error(std::string(who) + ": features contain NaN or infinity");
}

struct Split {
  Eigen::Index feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Scans every feature for the best binary partition of `idx`. The caller's
// impurity callback gets the sorted order and returns, for each prefix size,
// the gain of splitting there.
template <typename GainFn>
Split best_split(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& idx, int min_leaf,
                 GainFn&& gain_at) {
  Split best;
  best.gain = kMinGain;
  std::vector<Eigen::Index> order(idx);
  const auto n = static_cast<Eigen::Index>(idx.size());
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return x(a, f) < x(b, f); });
    gain_at(order, [&](Eigen::Index n_left, double gain) {
      if (n_left < min_leaf || n - n_left < min_leaf) return;
      const double lo = x(order[static_cast<std::size_t>(n_left - 1)], f);
      const double hi = x(order[static_cast<std::size_t>(n_left)], f);
      if (!(lo < hi)) return;  // cannot separate equal values
      if (gain > best.gain * (1.0 + kTieMargin)) {
        best.feature = f;
        best.threshold = lo + 0.5 * (hi - lo);
        best.gain = gain;
      }
    });
  }
  return best;
}

// ---------------------------------------------------------------------------
// Regression trees on negative gradients

struct GbmBuilder {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXd& grad;
  const Eigen::VectorXd& hess;
  const GbmParams& params;
  RegressionTree tree;

  std::int32_t build(const std::vector<Eigen::Index>& idx, int depth) {
    const auto at = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    double g_sum = 0.0;
    double h_sum = 0.0;
    for (Eigen::Index i : idx) {
      g_sum += grad(i);
      h_sum += hess(i);
    }
    tree.nodes[static_cast<std::size_t>(at)].value = -g_sum / std::max(h_sum, params.hessian_floor);
    if (depth >= params.max_depth || static_cast<int>(idx.size()) < 2 * params.min_samples_leaf) return at;

    // Variance reduction of the target -g, via prefix sums in sorted order.
    const Split split = best_split(x, idx, params.min_samples_leaf, [&](const auto& order, auto&& emit) {
      const auto n = static_cast<Eigen::Index>(order.size());
      double total = 0.0;
      double total_sq = 0.0;
      for (Eigen::Index i : order) {
        total -= grad(i);
        total_sq += grad(i) * grad(i);
      }
      const double sse_parent = total_sq - total * total / static_cast<double>(n);
      double left = 0.0;
      double left_sq = 0.0;
      for (Eigen::Index k = 1; k < n; ++k) {
        const double t = -grad(order[static_cast<std::size_t>(k - 1)]);
        left += t;
        left_sq += t * t;
        const double right = total - left;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left * left / static_cast<double>(k)) +
                           (right_sq - right * right / static_cast<double>(n - k));
        emit(k, sse_parent - sse);
      }
    });
    if (split.feature < 0) return at;

    std::vector<Eigen::Index> left_idx;
    std::vector<Eigen::Index> right_idx;
    for (Eigen::Index i : idx) (x(i, split.feature) < split.threshold ? left_idx : right_idx).push_back(i);
    const std::int32_t l = build(left_idx, depth + 1);
    const std::int32_t r = build(right_idx, depth + 1);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(at)];
    node.feature = static_cast<std::int32_t>(split.feature);
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    node.value = 0.0;
    return at;
  }
};

double weighted_logloss(const Eigen::VectorXd& margin, const Eigen::VectorXi& y, const Eigen::VectorXd& w) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < margin.size(); ++i) {
    // -log p for y=1 is softplus(-m); -log(1-p) for y=0 is softplus(m).
    loss += w(i) * (y(i) == 1 ? softplus(-margin(i)) : softplus(margin(i)));
  }
  return loss / w.sum();
}

// ---------------------------------------------------------------------------
// Gini classification trees

struct ForestBuilder {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXi& y;  // 0-based classes
  const ForestParams& params;
  ClassificationTree tree;

  static double gini_mass(const std::array<double, kNumClasses>& counts, double n) {
    if (n <= 0.0) return 0.0;
    double sq = 0.0;
    for (double c : counts) sq += c * c;
    return n - sq / n;  // n * gini
  }

  std::int32_t build(const std::vector<Eigen::Index>& idx, int depth) {
    const auto at = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::array<double, kNumClasses> counts{};
    for (Eigen::Index i : idx) counts[static_cast<std::size_t>(y(i))] += 1.0;
    const auto n = static_cast<double>(idx.size());
    auto& dist = tree.nodes[static_cast<std::size_t>(at)].distribution;
    for (std::size_t c = 0; c < counts.size(); ++c) dist[c] = counts[c] / n;
    const double parent = gini_mass(counts, n);
    if (depth >= params.max_depth || static_cast<int>(idx.size()) < params.min_samples_split || parent <= 0.0) {
      return at;
    }

    const Split split = best_split(x, idx, 1, [&](const auto& order, auto&& emit) {
      std::array<double, kNumClasses> left{};
      const auto m = static_cast<Eigen::Index>(order.size());
      for (Eigen::Index k = 1; k < m; ++k) {
        left[static_cast<std::size_t>(y(order[static_cast<std::size_t>(k - 1)]))] += 1.0;
        std::array<double, kNumClasses> right{};
        for (std::size_t c = 0; c < right.size(); ++c) right[c] = counts[c] - left[c];
        emit(k, parent - gini_mass(left, static_cast<double>(k)) -
                    gini_mass(right, static_cast<double>(m - k)));
      }
    });
    if (split.feature < 0) return at;

    std::vector<Eigen::Index> left_idx;
    std::vector<Eigen::Index> right_idx;
    for (Eigen::Index i : idx) (x(i, split.feature) < split.threshold ? left_idx : right_idx).push_back(i);
    const std::int32_t l = build(left_idx, depth + 1);
    const std::int32_t r = build(right_idx, depth + 1);
    ClassTreeNode& node = tree.nodes[static_cast<std::size_t>(at)];
    node.feature = static_cast<std::int32_t>(split.feature);
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return at;
  }
};

template <typename Node>
void check_nodes(ByteReader& in, const std::vector<Node>& nodes, int n_features) {
  if (nodes.empty()) in.fail("tree without nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (n.is_leaf()) continue;
    const auto count = static_cast<std::int32_t>(nodes.size());
    const auto self = static_cast<std::int32_t>(i);
    if (n.feature >= n_features) in.fail("split feature out of range");
    if (n.left <= self || n.right <= self || n.left >= count || n.right >= count) in.fail("bad child index");
    if (!std::isfinite(n.threshold)) in.fail("non-finite threshold");
  }
}

constexpr std::uint32_t kMaxCount = 1u << 24;

std::uint32_t read_count(ByteReader& in, const char* what) {
  const std::uint32_t n = in.u32();
  if (n > kMaxCount) in.fail(std::string("implausible ") + what + " count");
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------

double RegressionTree::predict(const RowRef& row) const { return descend(nodes, row).value; }

int RegressionTree::depth() const { return nodes.empty() ? 0 : tree_depth(nodes, 0); }

void GbmParams::validate() const {
  if (n_estimators < 0) throw Error("gbm: n_estimators must be non-negative");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw Error("gbm: learning rate must lie in (0, 1]");
  if (max_depth < 0) throw Error("gbm: max_depth must be non-negative");
  if (min_samples_leaf < 1) throw Error("gbm: min_samples_leaf must be at least 1");
  if (!(hessian_floor > 0.0)) throw Error("gbm: hessian floor must be positive");
}

GbmModel train_gbm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const Eigen::VectorXd& w,
                   const GbmParams& params) {
  params.validate();
  check_matrix(x, y.size(), "train_gbm");
  if (w.size() != y.size()) throw Error("train_gbm: weight count does not match label count");
  if (!w.allFinite() || (w.array() < 0.0).any()) throw Error("train_gbm: weights must be finite and non-negative");
  double w_pos = 0.0;
  double w_all = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0 && y(i) != 1) throw Error("train_gbm: labels must be 0 or 1");
    w_all += w(i);
    if (y(i) == 1) w_pos += w(i);
  }
  if (!(w_pos > 0.0) || !(w_pos < w_all)) throw Error("train_gbm: labels contain a single class");

  GbmModel model;
  model.learning_rate = params.learning_rate;
  model.n_features = static_cast<int>(x.cols());
  const double p0 = w_pos / w_all;
  model.base_score = std::log(p0 / (1.0 - p0));

  std::vector<Eigen::Index> all(static_cast<std::size_t>(x.rows()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  Eigen::VectorXd margin = Eigen::VectorXd::Constant(x.rows(), model.base_score);
  Eigen::VectorXd grad(x.rows());
  Eigen::VectorXd hess(x.rows());
  model.train_loss.push_back(weighted_logloss(margin, y, w));
  for (int round = 0; round < params.n_estimators; ++round) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double p = sigmoid(margin(i));
      grad(i) = w(i) * (p - static_cast<double>(y(i)));
      hess(i) = w(i) * p * (1.0 - p);
    }
    GbmBuilder builder{x, grad, hess, params, {}};
    builder.build(all, 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      margin(i) += params.learning_rate * builder.tree.predict(x.row(i));
    }
    model.trees.push_back(std::move(builder.tree));
    model.train_loss.push_back(weighted_logloss(margin, y, w));
  }
  return model;
}

double predict_margin(const GbmModel& model, const RowRef& row) {
  if (row.size() != model.n_features) {
    throw Error("predict_proba: row has " + std::to_string(row.size()) + " features, model expects " +
                std::to_string(model.n_features));
  }
  double sum = 0.0;
  for (const auto& t : model.trees) sum += t.predict(row);
  return model.base_score + model.learning_rate * sum;
}

double predict_proba(const GbmModel& model, const RowRef& row) {
  // Clamp keeps the result strictly inside (0, 1) in double precision.
  return sigmoid(std::clamp(predict_margin(model, row), -30.0, 30.0));
}

// ---------------------------------------------------------------------------

const std::array<double, kNumClasses>& ClassificationTree::leaf(const RowRef& row) const {
  return descend(nodes, row).distribution;
}

int ClassificationTree::depth() const { return nodes.empty() ? 0 : tree_depth(nodes, 0); }

ForestParams ForestParams::single_tree(int max_depth, std::uint64_t seed) {
  ForestParams p;
  p.n_trees = 1;
  p.max_depth = max_depth;
  p.bootstrap = false;
  p.seed = seed;
  return p;
}

void ForestParams::validate() const {
  if (n_trees < 1) throw Error("forest: n_trees must be at least 1");
  if (max_depth < 1) throw Error("forest: max_depth must be at least 1");
  if (min_samples_split < 2) throw Error("forest: min_samples_split must be at least 2");
}

ForestModel train_forest(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels, const ForestParams& params) {
  params.validate();
  check_matrix(x, labels.size(), "train_forest");
  Eigen::VectorXi y(labels.size());
  std::array<int, kNumClasses> present{};
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (!valid_label(labels(i))) throw Error("train_forest: label " + std::to_string(labels(i)) + " outside 1..5");
    y(i) = labels(i) - 1;
    present[static_cast<std::size_t>(y(i))] = 1;
  }
  if (std::accumulate(present.begin(), present.end(), 0) < 2) {
    throw Error("train_forest: at least two classes are required");
  }

  ForestModel model;
  model.n_features = static_cast<int>(x.cols());
  model.trees.resize(static_cast<std::size_t>(params.n_trees));
  const auto n = static_cast<std::size_t>(x.rows());
  parallel_for(model.trees.size(), [&](std::size_t t) {
    std::vector<Eigen::Index> idx(n);
    if (params.bootstrap) {
      std::mt19937_64 rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
      for (auto& i : idx) i = static_cast<Eigen::Index>(rng() % n);
      std::sort(idx.begin(), idx.end());
    } else {
      std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    }
    ForestBuilder builder{x, y, params, {}};
    builder.build(idx, 0);
    model.trees[t] = std::move(builder.tree);
  });
  return model;
}

ForestPrediction predict_forest(const ForestModel& model, const RowRef& row, FusionPolicy fusion,
                                TiePolicy ties) {
  if (row.size() != model.n_features) {
    throw Error("predict_forest: row has " + std::to_string(row.size()) + " features, model expects " +
                std::to_string(model.n_features));
  }
  if (model.trees.empty()) throw Error("predict_forest: model has no trees");
  ForestPrediction out;
  std::vector<int> votes;
  std::vector<ClassDistribution> dists;
  votes.reserve(model.trees.size());
  dists.reserve(model.trees.size());
  for (const auto& tree : model.trees) {
    const auto& leaf = tree.leaf(row);
    votes.push_back(argmax_label(leaf, ties));
    dists.push_back(ClassDistribution{leaf});
  }
  const VoteOutcome vote = majority_vote(votes, ties);
  const AveragedOutcome soft = average_probabilities(dists, ties);
  out.votes = vote.counts;
  out.distribution = soft.distribution;
  if (fusion == FusionPolicy::Majority) {
    out.label = vote.winner;
    out.was_tie = vote.was_tie;
  } else {
    out.label = soft.label;
    out.was_tie = soft.was_tie;
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_gbm(ByteWriter& out, const GbmModel& m) {
  out.i32(m.n_features);
  out.f64(m.learning_rate);
  out.f64(m.base_score);
  out.u32(static_cast<std::uint32_t>(m.trees.size()));
  for (const auto& t : m.trees) {
    out.u32(static_cast<std::uint32_t>(t.nodes.size()));
    for (const auto& n : t.nodes) {
      out.i32(n.feature);
      out.f64(n.threshold);
      out.i32(n.left);
      out.i32(n.right);
      out.f64(n.value);
    }
  }
}

GbmModel read_gbm(ByteReader& in) {
  GbmModel m;
  m.n_features = in.i32();
  m.learning_rate = in.f64();
  m.base_score = in.f64();
  if (m.n_features <= 0) in.fail("non-positive feature count");
  if (!(m.learning_rate > 0.0 && m.learning_rate <= 1.0) || !std::isfinite(m.base_score)) {
    in.fail("invalid boosting header");
  }
  m.trees.resize(read_count(in, "tree"));
  for (auto& t : m.trees) {
    t.nodes.resize(read_count(in, "node"));
    for (auto& n : t.nodes) {
      n.feature = in.i32();
      n.threshold = in.f64();
      n.left = in.i32();
      n.right = in.i32();
      n.value = in.f64();
      if (!std::isfinite(n.value)) in.fail("non-finite leaf value");
    }
    check_nodes(in, t.nodes, m.n_features);
  }
  return m;
}

void write_forest(ByteWriter& out, const ForestModel& m) {
  out.i32(m.n_features);
  out.i32(m.n_classes);
  out.u32(static_cast<std::uint32_t>(m.trees.size()));
  for (const auto& t : m.trees) {
    out.u32(static_cast<std::uint32_t>(t.nodes.size()));
    for (const auto& n : t.nodes) {
      out.i32(n.feature);
      out.f64(n.threshold);
      out.i32(n.left);
      out.i32(n.right);
      for (double p : n.distribution) out.f64(p);
    }
  }
}

ForestModel read_forest(ByteReader& in) {
  ForestModel m;
  m.n_features = in.i32();
  m.n_classes = in.i32();
  if (m.n_features <= 0) in.fail("non-positive feature count");
  if (m.n_classes != kNumClasses) in.fail("unexpected class count");
  m.trees.resize(read_count(in, "tree"));
  if (m.trees.empty()) in.fail("forest without trees");
  for (auto& t : m.trees) {
    t.nodes.resize(read_count(in, "node"));
    for (auto& n : t.nodes) {
      n.feature = in.i32();
      n.threshold = in.f64();
      n.left = in.i32();
      n.right = in.i32();
      for (double& p : n.distribution) {
        p = in.f64();
        if (!std::isfinite(p) || p < 0.0) in.fail("invalid leaf distribution");
      }
    }
    check_nodes(in, t.nodes, m.n_features);
  }
  return m;
}

std::string serialize_gbm(const GbmModel& model) {
  ByteWriter w;
  write_gbm(w, model);
  return w.take();
}

std::string serialize_forest(const ForestModel& model) {
  ByteWriter w;
  write_forest(w, model);
  return w.take();
}

}  // namespace dys
