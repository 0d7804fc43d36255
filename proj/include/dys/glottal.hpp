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

#ifndef DYS_GLOTTAL_HPP
#define DYS_GLOTTAL_HPP

#include <array>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dys/corpus.hpp"

namespace dys {

/// Glottal closure instants of one clip, ascending.
struct GciSequence {
  std::vector<Eigen::Index> instants;
  std::vector<double> pulse_amplitudes;  ///< residual peak magnitude at each instant
  double mean_pitch_hz = 0.0;
  int sample_rate_hz = 0;

  std::size_t size() const { return instants.size(); }
  bool empty() const { return instants.empty(); }
};

/// The seven GCI-derived measures.
struct GlottalParams {
  double mean_period_ms = 0.0;
  double period_std_ms = 0.0;
  double jitter_local_pct = 0.0;
  double shimmer_local_pct = 0.0;
  double mean_pulse_amplitude = 0.0;
  double pulse_amplitude_std = 0.0;
  double voiced_fraction = 0.0;

  std::array<double, 7> values() const {
    return {mean_period_ms,       period_std_ms,       jitter_local_pct, shimmer_local_pct,
            mean_pulse_amplitude, pulse_amplitude_std, voiced_fraction};
  }
  static constexpr std::array<std::string_view, 7> kNames = {
      "mean_period_ms",       "period_std_ms",       "jitter_local_pct", "shimmer_local_pct",
      "mean_pulse_amplitude", "pulse_amplitude_std", "voiced_fraction"};
};

struct GciOptions {
  double f_min_hz = 60.0;
  double f_max_hz = 400.0;
  double mbs_window_periods = 1.75;  ///< Blackman window length of the mean-based signal
  /// The search interval also reaches this fraction of a period before the
  /// mean-based-signal minimum.
  double interval_lead = 0.25;
  double lpc_frame_ms = 25.0;
  double lpc_hop_ms = 5.0;
};

/// 2 + fs/1000, the usual inverse-filter order.
int residual_lpc_order(int sample_rate_hz);

/// Blackman-weighted local mean over `window_len` samples (odd), normalized
/// by the window weight actually inside the signal.
Eigen::VectorXd mean_based_signal(const Eigen::VectorXd& x, Eigen::Index window_len);

/// Mean-based-signal GCI detection refined on the LPC residual. Unvoiced,
/// silent or too-short (< 100 ms) input gives an empty sequence.
GciSequence detect_gci(const AudioClip& clip, const GciOptions& options = {});

/// Periods are gaps between consecutive instants inside [2.5, 16.7] ms.
/// voiced_fraction counts 20 ms / 10 ms frames holding at least one instant.
GlottalParams extract_glottal_params(const GciSequence& gci, const AudioClip& clip);

}  // namespace dys

#endif  // DYS_GLOTTAL_HPP
