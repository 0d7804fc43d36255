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

#ifndef DYS_HIER_HPP
#define DYS_HIER_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dys/boost.hpp"
#include "dys/corpus.hpp"
#include "dys/formant.hpp"
#include "dys/fusion.hpp"
#include "dys/glottal.hpp"

namespace dys {

enum class SubgroupKey { Female, MaleUnder60, MaleOver60, All };
enum class Segment { Full, Initial20s, Later10s };

/// Table tokens: F, M<60, M>=60, All.
std::string_view to_string(SubgroupKey key);
SubgroupKey parse_subgroup(std::string_view text);
/// Full, Initial20s, Later10s.
std::string_view to_string(Segment segment);
Segment parse_segment(std::string_view text);

/// Male speakers split at 60 years: under 60 vs 60 and over.
bool in_subgroup(SubgroupKey key, Gender gender, int age_years);

struct StageOneSpec {
  int model_id = 0;
  SubgroupKey subgroup = SubgroupKey::All;
  std::vector<int> positive_classes;
  std::vector<int> negative_classes;
  UtteranceKind sound_category = UtteranceKind::A;
  int n_estimators = 100;
  double frame_len_ms = 100.0;
  Segment segment = Segment::Full;

  void validate() const;
  bool operator==(const StageOneSpec&) const = default;
};

/// The eight rows of the stage-1 configuration table.
std::vector<StageOneSpec> default_hierarchy_config();

struct HierarchyConfig {
  std::vector<StageOneSpec> stage1 = default_hierarchy_config();
  double learning_rate = 0.01;
  int max_depth = 3;
  ForestParams stage2;  ///< 100 trees of depth 5 by default
  /// Stage-1 models also score speakers outside their subgroup; when false
  /// those inputs are fixed at 0.5.
  bool evaluate_out_of_group = true;
  FusionPolicy fusion = FusionPolicy::Majority;
  TiePolicy ties = TiePolicy::Severe;

  void validate() const;
};

/// Tabular text: `key=value` settings, then a header and one row per model,
/// e.g. `1,F,3,4;5,A,200,100,Full`. '#' starts a comment line.
std::string format_hierarchy_config(const HierarchyConfig& config);
HierarchyConfig parse_hierarchy_config(std::string_view text);
HierarchyConfig load_hierarchy_config(const std::filesystem::path& path);
void save_hierarchy_config(const HierarchyConfig& config, const std::filesystem::path& path);

// ---------------------------------------------------------------------------

inline constexpr Eigen::Index kAcousticDims = 12;
inline constexpr Eigen::Index kSpeakerDims = kAcousticDims + 2;

double normalize_age(int age_years);   ///< age/100 clamped to [0, 1]
double encode_gender(Gender gender);   ///< 0.9 female, 0.1 male

struct SpeakerFeatureVector {
  std::array<double, 5> formants_hz{};
  GlottalParams glottal;
  double age_norm = 0.0;
  double gender_code = 0.0;
  bool segment_fallback = false;  ///< requested segment lay past the clip end; Full used

  Eigen::Matrix<double, kAcousticDims, 1> acoustic() const;
  Eigen::Matrix<double, kSpeakerDims, 1> to_vector() const;
  static std::vector<std::string> acoustic_names();
};

/// The clip span a segment selects; `fell_back` reports a Full fallback.
AudioClip apply_segment(const AudioClip& clip, Segment segment, bool* fell_back = nullptr);

SpeakerFeatureVector build_feature_vector(const SpeakerRecord& record, const StageOneSpec& spec);

/// Acoustic features of every speaker for every spec. Extraction that
/// repeats a (sound, frame, effective segment) triple is computed once.
struct FeatureTable {
  /// features[s] is speaker-major: row = speaker, one vector per spec.
  std::vector<std::vector<SpeakerFeatureVector>> features;
  /// Human-readable extraction problems; failed formants become zeros.
  std::vector<std::string> warnings;
};

FeatureTable extract_feature_table(std::span<const SpeakerRecord> records, std::span<const StageOneSpec> specs);

// ---------------------------------------------------------------------------

struct HierarchyModel {
  HierarchyConfig config;
  std::vector<GbmModel> stage1;  ///< aligned with config.stage1
  ForestModel stage2;
};

struct TrainReport {
  struct ModelSummary {
    int model_id = 0;
    int n_train = 0;
    int n_positive = 0;
    double train_accuracy = 0.0;
  };
  std::vector<ModelSummary> stage1;
  double stage2_train_accuracy = 0.0;
  std::vector<std::string> warnings;
};

HierarchyModel train_hierarchy(std::span<const SpeakerRecord> records, const HierarchyConfig& config,
                               std::uint64_t seed, TrainReport* report = nullptr);

struct HierarchyPrediction {
  int label = 0;
  std::vector<double> stage1_probabilities;
  Eigen::VectorXd stage2_input;
  ForestPrediction forest;
  std::vector<std::string> warnings;
};

/// Stage-2 input: stage-1 probabilities, then age_norm and gender_code.
Eigen::VectorXd stage2_input(const HierarchyModel& model, std::span<const SpeakerFeatureVector> features,
                             const SpeakerRecord& record, std::vector<double>* probabilities = nullptr);

HierarchyPrediction predict_hierarchy(const HierarchyModel& model, const SpeakerRecord& record);
/// Same as above on features extracted beforehand (one per stage-1 spec).
HierarchyPrediction predict_hierarchy(const HierarchyModel& model, const SpeakerRecord& record,
                                      std::span<const SpeakerFeatureVector> features);

/// Versioned binary model file: magic, version, length-prefixed sections,
/// trailing checksum.
std::string serialize_hierarchy(const HierarchyModel& model);
HierarchyModel deserialize_hierarchy(std::string_view bytes);
void save_hierarchy(const HierarchyModel& model, const std::filesystem::path& path);
HierarchyModel load_hierarchy(const std::filesystem::path& path);

}  // namespace dys

#endif  // DYS_HIER_HPP
