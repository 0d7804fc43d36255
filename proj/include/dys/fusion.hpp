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

#ifndef DYS_FUSION_HPP
#define DYS_FUSION_HPP

#include <array>
#include <span>

#include "dys/common.hpp"

namespace dys {

/// Which class wins an exact tie: the most severe (lowest label) or the least.
enum class TiePolicy { Severe, LeastSevere };
enum class FusionPolicy { Majority, Soft };

const char* to_string(TiePolicy policy);
const char* to_string(FusionPolicy policy);
TiePolicy parse_tie_policy(std::string_view text);
FusionPolicy parse_fusion_policy(std::string_view text);

struct ClassDistribution {
  std::array<double, kNumClasses> p{};

  double operator[](int label) const { return p.at(static_cast<std::size_t>(label - 1)); }
  /// Throws unless non-negative, finite and summing to 1 within 1e-9.
  void validate() const;
};

struct VoteOutcome {
  int winner = 0;
  std::array<int, kNumClasses> counts{};
  bool was_tie = false;
};

struct AveragedOutcome {
  ClassDistribution distribution;
  int label = 0;
  bool was_tie = false;
};

/// Label with the largest score; ties resolved by `policy`.
int argmax_label(const std::array<double, kNumClasses>& scores, TiePolicy policy, bool* was_tie = nullptr);

VoteOutcome majority_vote(std::span<const int> labels, TiePolicy policy = TiePolicy::Severe);

AveragedOutcome average_probabilities(std::span<const ClassDistribution> dists,
                                      TiePolicy policy = TiePolicy::Severe);

/// Mean of per-utterance losses.
double aggregate_speaker_loss(std::span<const double> losses);

}  // namespace dys

#endif  // DYS_FUSION_HPP
