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

#ifndef DYS_BOOST_HPP
#define DYS_BOOST_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dys/fusion.hpp"
#include "dys/serialize.hpp"

namespace dys {

using RowRef = Eigen::Ref<const Eigen::RowVectorXd>;

/// Flat-array tree node; feature < 0 marks a leaf. Children always follow
/// their parent in the node array.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;  ///< go left when x[feature] < threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  ///< leaf output

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(const RowRef& row) const;
  int depth() const;
};

struct GbmParams {
  int n_estimators = 100;
  double learning_rate = 0.01;
  int max_depth = 3;
  int min_samples_leaf = 2;
  double hessian_floor = 1e-6;
  std::uint64_t seed = 0;  ///< reserved: training draws no randomness

  void validate() const;
};

struct GbmModel {
  std::vector<RegressionTree> trees;
  double learning_rate = 0.01;
  double base_score = 0.0;  ///< log-odds
  int n_features = 0;
  /// Weighted mean logistic loss on the training set: entry 0 before any
  /// tree, entry r after r trees. Not serialized.
  std::vector<double> train_loss;
};

/// Logistic-loss gradient boosting. labels are 0/1; weights non-negative.
GbmModel train_gbm(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                   const Eigen::VectorXd& weights, const GbmParams& params);

/// base_score + lr * sum of tree outputs.
double predict_margin(const GbmModel& model, const RowRef& row);
/// Sigmoid of the margin, in (0, 1).
double predict_proba(const GbmModel& model, const RowRef& row);

// ---------------------------------------------------------------------------

struct ClassTreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<double, kNumClasses> distribution{};  ///< leaf class frequencies

  bool is_leaf() const { return feature < 0; }
};

struct ClassificationTree {
  std::vector<ClassTreeNode> nodes;

  const std::array<double, kNumClasses>& leaf(const RowRef& row) const;
  int depth() const;
};

struct ForestParams {
  int n_trees = 100;
  int max_depth = 5;
  bool bootstrap = true;
  int min_samples_split = 2;
  std::uint64_t seed = 0;

  /// One tree on the full sample, no bootstrap.
  static ForestParams single_tree(int max_depth = 5, std::uint64_t seed = 0);
  void validate() const;
};

struct ForestModel {
  std::vector<ClassificationTree> trees;
  int n_features = 0;
  int n_classes = kNumClasses;
};

/// Bagged Gini trees over labels 1..5; every feature is considered at every split.
ForestModel train_forest(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                         const ForestParams& params);

struct ForestPrediction {
  int label = 0;
  std::array<int, kNumClasses> votes{};  ///< per-tree hard votes, sums to n_trees
  ClassDistribution distribution;        ///< mean of the leaf distributions
  bool was_tie = false;
};

ForestPrediction predict_forest(const ForestModel& model, const RowRef& row,
                                FusionPolicy fusion = FusionPolicy::Majority,
                                TiePolicy ties = TiePolicy::Severe);

// ---------------------------------------------------------------------------

void write_gbm(ByteWriter& out, const GbmModel& model);
GbmModel read_gbm(ByteReader& in);
void write_forest(ByteWriter& out, const ForestModel& model);
ForestModel read_forest(ByteReader& in);

std::string serialize_gbm(const GbmModel& model);
std::string serialize_forest(const ForestModel& model);

}  // namespace dys

#endif  // DYS_BOOST_HPP
