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

#ifndef DYS_CLI_HPP
#define DYS_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dys/eval.hpp"
#include "dys/fusion.hpp"
#include "dys/hier.hpp"

namespace dys {

/// Bad arguments; the command-line front end maps it to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class FeatureSet { Acoustic12, Phase54, Both };

FeatureSet parse_feature_set(std::string_view text);

/// Options shared by every command. Paths are validated by each command
/// before it does any work.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path manifest;
  std::filesystem::path model;
  std::filesystem::path predictions;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;  ///< hierarchy table; defaults when absent
  std::optional<FusionPolicy> fusion;           ///< overrides the config's stage-2 fusion
  std::optional<TiePolicy> ties;
  FeatureSet feature_set = FeatureSet::Both;
  int n_per_class = 0;
};

/// Writes the synthetic corpus; returns the manifest path.
std::filesystem::path cmd_synth(const RunConfig& run);

struct ExtractSummary {
  int acoustic_rows = 0;
  int phase_rows = 0;
  std::vector<std::string> warnings;
};

/// acoustic12.csv and/or phase54.csv plus extract_report.txt under `out`.
/// Per-utterance failures are recorded as warnings; the run continues.
ExtractSummary cmd_extract(const RunConfig& run);

TrainReport cmd_train(const RunConfig& run);

/// Returns the number of speakers written.
int cmd_predict(const RunConfig& run);

/// Writes the text report to `out` and the key-value report next to it
/// (same stem, .kv extension).
MetricsReport cmd_evaluate(const RunConfig& run);

/// The key-value report path that accompanies a text report.
std::filesystem::path kv_report_path(const std::filesystem::path& text_report);

}  // namespace dys

#endif  // DYS_CLI_HPP
