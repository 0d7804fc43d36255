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

#ifndef DYS_CORPUS_HPP
#define DYS_CORPUS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dys/common.hpp"

namespace dys {

/// Mono audio. Samples are nominally in [-1, 1].
struct AudioClip {
  Eigen::VectorXd samples;
  int sample_rate_hz = 0;

  Eigen::Index size() const { return samples.size(); }
  bool empty() const { return samples.size() == 0; }
  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
  /// Throws unless the clip is non-empty, finite and has a positive rate.
  void validate() const;
};

enum class UtteranceKind { A, E, I, O, U, KA, PA, TA, Combined };

/// The eight kinds a speaker records; Combined is never ingested.
inline constexpr std::array<UtteranceKind, 8> kRecordedKinds = {
    UtteranceKind::A,  UtteranceKind::E,  UtteranceKind::I,  UtteranceKind::O,
    UtteranceKind::U,  UtteranceKind::KA, UtteranceKind::PA, UtteranceKind::TA};

/// Concatenation order of the combined (C+) utterance.
inline constexpr std::array<UtteranceKind, 8> kCombinedOrder = {
    UtteranceKind::A,  UtteranceKind::E,  UtteranceKind::I,  UtteranceKind::O,
    UtteranceKind::U,  UtteranceKind::KA, UtteranceKind::TA, UtteranceKind::PA};

std::string_view to_string(UtteranceKind kind);
UtteranceKind parse_utterance_kind(std::string_view text);
bool is_vowel(UtteranceKind kind);

enum class Gender { Female, Male };

std::string_view to_string(Gender gender);

struct SpeakerRecord {
  std::string speaker_id;
  int age_years = 0;
  Gender gender = Gender::Female;
  std::optional<int> severity_label;
  std::map<UtteranceKind, AudioClip> utterances;

  const AudioClip& clip(UtteranceKind kind) const;
  /// Exactly the eight recorded kinds, label in 1..5 when present.
  void validate() const;
};

/// Per-class loss weights, index 0 is class 1.
struct ClassWeights {
  std::array<double, kNumClasses> weight{};
  double operator[](int label) const { return weight.at(static_cast<std::size_t>(label - 1)); }
};

/// weight_c = N / (5 * n_c). Every class must occur.
ClassWeights compute_class_weights(std::span<const int> labels);

AudioClip concat_utterances(const SpeakerRecord& record, std::span<const UtteranceKind> order);

// ---------------------------------------------------------------------------
// Manifest I/O
//
// CSV, UTF-8, header row:
//   speaker_id,age,gender,label,path_A,path_E,path_I,path_O,path_U,path_KA,path_PA,path_TA
// gender is F or M, label is 1..5 or empty. Relative paths resolve against
// the manifest's directory.

std::vector<SpeakerRecord> load_manifest(const std::filesystem::path& path);

/// Writes one 16-bit WAV per utterance under out_dir/audio and a manifest at
/// out_dir/manifest.csv (returned). Files are replaced atomically.
std::filesystem::path save_corpus(std::span<const SpeakerRecord> records,
                                  const std::filesystem::path& out_dir);

/// Writes `text` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

// ---------------------------------------------------------------------------
// Synthetic source-filter speech

/// Parameters of a consonant-vowel syllable train (KA/PA/TA style).
struct SyllableTrain {
  double rate_hz = 5.0;        ///< syllables per second
  double voiced_duty = 0.55;   ///< fraction of each cycle that is voiced
  double burst_ms = 15.0;      ///< consonant noise burst length
  double burst_center_hz = 1800.0;
};

struct SynthesisProfile {
  double f0_hz = 120.0;
  double jitter_pct = 0.0;   ///< target local jitter of the excitation
  double shimmer_pct = 0.0;  ///< target local shimmer of the excitation
  std::array<double, 5> formants_hz{700, 1220, 2600, 3200, 3700};
  std::array<double, 5> formant_bandwidths_hz{80, 90, 120, 150, 200};
  double formant_instability_pct = 0.0;  ///< per-period relative formant wobble
  /// Corner of the one-pole source lowpass (net glottal + radiation slope of
  /// -6 dB/oct above it); 0 leaves the excitation spectrally flat.
  double source_tilt_hz = 50.0;
  double duration_s = 1.0;
  int sample_rate_hz = 8000;
  double noise_floor = 0.0;  ///< sd of additive white noise, relative to peak
  bool normalize = false;    ///< scale output peak to 0.9
  std::optional<SyllableTrain> syllables;

  void validate() const;
};

struct SynthesizedUtterance {
  AudioClip clip;
  std::vector<Eigen::Index> impulse_positions;  ///< excitation sample indices
  std::vector<double> impulse_amplitudes;
};

/// Impulse train through a cascade of formant resonators. Deterministic in
/// (profile, seed).
SynthesizedUtterance synthesize_utterance(const SynthesisProfile& profile, std::uint64_t seed);

/// Class-dependent generator parameters. Jitter, shimmer and formant
/// instability grow strictly from class 5 to class 1.
struct SeverityTraits {
  double jitter_pct;
  double shimmer_pct;
  double formant_instability_pct;
  double syllable_rate_hz;
  double strain_ratio;  ///< f0 multiplier; >1 only for classes 3 and 4
};

SeverityTraits severity_traits(int label);

/// Vowel formant targets for an adult male vocal tract.
std::array<double, 5> vowel_formants(UtteranceKind kind);

struct CorpusOptions {
  int sample_rate_hz = 16000;
  double vowel_duration_s = 1.0;
  double syllable_duration_s = 1.5;
  double speaker_spread = 0.05;  ///< log-sd of per-speaker jitter/shimmer/f0 draws
  std::string id_prefix = "syn";
};

/// 5 * n_per_class speakers ordered by class then index. Speaker i of a class
/// rotates through {female, male < 60, male >= 60, female}.
std::vector<SpeakerRecord> synthesize_corpus(int n_per_class, std::uint64_t seed,
                                             const CorpusOptions& options = {});

}  // namespace dys

#endif  // DYS_CORPUS_HPP
