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

#ifndef DYS_PHASEFEAT_HPP
#define DYS_PHASEFEAT_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dys/corpus.hpp"
#include "dys/dsp.hpp"

namespace dys {

inline constexpr Eigen::Index kPhaseCoeffs = 13;
inline constexpr Eigen::Index kPhaseDims = 4 * kPhaseCoeffs + 2;
inline constexpr Eigen::Index kPhaseFrames = 500;

using PhaseCepstrum = Eigen::Matrix<double, kPhaseCoeffs, 1>;
using PhaseVector = Eigen::Matrix<double, kPhaseDims, 1>;

struct PhaseFrame {
  PhaseCepstrum pcc = PhaseCepstrum::Zero();
  PhaseCepstrum gdcc = PhaseCepstrum::Zero();
  PhaseCepstrum mgd = PhaseCepstrum::Zero();
  PhaseCepstrum inst_freq = PhaseCepstrum::Zero();
  double phase_coherence = 0.0;
  double spectral_entropy = 0.0;

  /// pcc, gdcc, mgd, inst_freq, coherence, entropy.
  PhaseVector to_vector() const;
  static std::vector<std::string> column_names();
};

struct PhaseFrameMatrix {
  Eigen::MatrixXd frames = Eigen::MatrixXd::Zero(kPhaseFrames, kPhaseDims);
  Eigen::Index valid_frame_count = 0;
};

struct MgdParams {
  double alpha = 0.4;
  double gamma = 0.9;
  int lifter_len = 8;  ///< 0 disables cepstral smoothing
};

struct PhaseOptions {
  int sample_rate_hz = 8000;
  double frame_ms = 20.0;
  double hop_ms = 10.0;
  Eigen::Index n_fft = 256;
  Window window = Window::Hamming;
  MgdParams mgd;
};

/// tau(k) = (XR YR + XI YI) / (|X|^2 + 1e-8 max|X|^2), X = DFT(x), Y = DFT(n x[n]).
Eigen::VectorXd group_delay_spectrum(const Eigen::VectorXd& frame, Eigen::Index n_fft);

/// sign(g)|g|^alpha with g = (XR YR + XI YI) / (S^{2 gamma} + 1e-8 max S^{2 gamma}),
/// S the low-time liftered magnitude of X.
Eigen::VectorXd modified_group_delay(const Eigen::VectorXd& frame, Eigen::Index n_fft,
                                     const MgdParams& params = {});

/// Principal-value phase of the windowed, zero-padded frame (n_fft/2 + 1 bins).
Eigen::VectorXd frame_phase(const Eigen::VectorXd& frame, Eigen::Index n_fft,
                            Window window = Window::Hamming);

/// Per-bin instantaneous-frequency deviation in Hz; zeros without a previous frame.
Eigen::VectorXd if_deviation(const Eigen::VectorXd& phase, const std::optional<Eigen::VectorXd>& prev_phase,
                             Eigen::Index hop_len, int sample_rate_hz);

/// Phase wrapped into (-pi, pi].
double princarg(double phase);

/// Unwraps a phase sequence by removing 2 pi jumps, scanning low to high.
Eigen::VectorXd unwrap_phase(const Eigen::VectorXd& phase);

/// The 54 features of one frame. The frame is windowed and scaled to unit
/// RMS first, so every feature is invariant to the input gain. All-zero
/// frames give an all-zero PhaseFrame.
PhaseFrame phase_frame(const Eigen::VectorXd& frame, const std::optional<Eigen::VectorXd>& prev_phase,
                       Eigen::Index n_fft, Eigen::Index hop_len, const PhaseOptions& options = {});

/// Resample, frame, featurize; truncated or zero-padded to 500 rows.
PhaseFrameMatrix utterance_phase_matrix(const AudioClip& clip, const PhaseOptions& options = {});

}  // namespace dys

#endif  // DYS_PHASEFEAT_HPP
