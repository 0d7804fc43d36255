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

#ifndef DYS_EVAL_HPP
#define DYS_EVAL_HPP

#include <array>
#include <span>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "dys/common.hpp"

namespace dys {

/// counts(t-1, p-1) = number of speakers with true label t predicted as p.
struct ConfusionMatrix {
  Eigen::Matrix<int, kNumClasses, kNumClasses> counts = Eigen::Matrix<int, kNumClasses, kNumClasses>::Zero();

  int total() const { return counts.sum(); }
  int correct() const { return counts.trace(); }
  int at(int true_label, int predicted_label) const { return counts(true_label - 1, predicted_label - 1); }
};

using LabelPair = std::pair<int, int>;  ///< (true, predicted)

ConfusionMatrix confusion_matrix(std::span<const LabelPair> pairs);

struct MetricsReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  std::array<double, kNumClasses> f1{};
  std::array<int, kNumClasses> support{};
  int total = 0;
  int correct = 0;
};

MetricsReport metrics(const ConfusionMatrix& matrix);

/// Human-readable table of the matrix and the metrics.
std::string format_report_text(const ConfusionMatrix& matrix, const MetricsReport& report);
/// One `key=value` per line; values printed with 17 significant digits.
std::string format_report_kv(const ConfusionMatrix& matrix, const MetricsReport& report);

}  // namespace dys

#endif  // DYS_EVAL_HPP
