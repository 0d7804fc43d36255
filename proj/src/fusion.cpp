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

#include "dys/fusion.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace dys {

const char* to_string(TiePolicy policy) {
  return policy == TiePolicy::Severe ? "severe" : "least-severe";
}

const char* to_string(FusionPolicy policy) {
  return policy == FusionPolicy::Majority ? "majority" : "soft";
}

TiePolicy parse_tie_policy(std::string_view text) {
  if (text == "severe") return TiePolicy::Severe;
  if (text == "least-severe") return TiePolicy::LeastSevere;
  throw Error("unknown tie policy '" + std::string(text) + "' (expected severe|least-severe)");
}

FusionPolicy parse_fusion_policy(std::string_view text) {
  if (text == "majority") return FusionPolicy::Majority;
  if (text == "soft") return FusionPolicy::Soft;
  throw Error("unknown fusion policy '" + std::string(text) + "' (expected majority|soft)");
}

void ClassDistribution::validate() const {
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) throw Error("class distribution has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("class distribution does not sum to 1");
}

int argmax_label(const std::array<double, kNumClasses>& scores, TiePolicy policy, bool* was_tie) {
  double best = scores[0];
  for (double s : scores) best = std::max(best, s);
  int n_best = 0;
  int first = 0;
  int last = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    if (scores[static_cast<std::size_t>(c)] == best) {
      if (n_best == 0) first = c;
      last = c;
      ++n_best;
    }
  }
  if (was_tie) *was_tie = n_best > 1;
  return 1 + (policy == TiePolicy::Severe ? first : last);
}

VoteOutcome majority_vote(std::span<const int> labels, TiePolicy policy) {
  if (labels.empty()) throw Error("majority_vote: no votes");
  VoteOutcome out;
  for (int label : labels) {
    if (!valid_label(label)) throw Error("majority_vote: label " + std::to_string(label) + " outside 1..5");
    ++out.counts[static_cast<std::size_t>(label - 1)];
  }
  std::array<double, kNumClasses> scores{};
  for (std::size_t c = 0; c < scores.size(); ++c) scores[c] = out.counts[c];
  out.winner = argmax_label(scores, policy, &out.was_tie);
  return out;
}

AveragedOutcome average_probabilities(std::span<const ClassDistribution> dists, TiePolicy policy) {
  if (dists.empty()) throw Error("average_probabilities: no distributions");
  std::array<double, kNumClasses> mean{};
  for (const auto& d : dists) {
    for (std::size_t c = 0; c < mean.size(); ++c) {
      if (!std::isfinite(d.p[c]) || d.p[c] < 0.0) {
        throw Error("average_probabilities: negative or non-finite probability");
      }
      mean[c] += d.p[c];
    }
  }
  const double total = std::accumulate(mean.begin(), mean.end(), 0.0);
  if (!(total > 0.0)) throw Error("average_probabilities: all-zero distributions");
  AveragedOutcome out;
  for (std::size_t c = 0; c < mean.size(); ++c) out.distribution.p[c] = mean[c] / total;
  out.label = argmax_label(out.distribution.p, policy, &out.was_tie);
  return out;
}

double aggregate_speaker_loss(std::span<const double> losses) {
  if (losses.empty()) throw Error("aggregate_speaker_loss: no losses");
  double sum = 0.0;
  for (double l : losses) {
    if (!std::isfinite(l) || l < 0.0) throw Error("aggregate_speaker_loss: losses must be finite and non-negative");
    sum += l;
  }
  return sum / static_cast<double>(losses.size());
}

}  // namespace dys
