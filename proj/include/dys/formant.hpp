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

#ifndef DYS_FORMANT_HPP
#define DYS_FORMANT_HPP

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "dys/corpus.hpp"
#include "dys/dsp.hpp"

namespace dys {

struct FormantSet {
  std::array<double, 5> f_hz{};
  std::array<double, 5> bandwidths_hz{};
  int n_voiced_frames_used = 0;
};

/// Raised when no analysis frame yields five formant candidates.
class PartialFormantError : public Error {
 public:
  PartialFormantError(int found, const std::string& what) : Error(what), found_(found) {}
  int found() const { return found_; }

 private:
  int found_;
};

struct FormantOptions {
  int analysis_rate_hz = 10000;
  int lpc_order = 12;
  double preemphasis = 0.97;
  double hop_ms = 10.0;
  double max_bandwidth_hz = 600.0;
  double edge_margin_hz = 50.0;  ///< candidates this close to DC or Nyquist are dropped
  double energy_gate_db = -30.0;
};

/// A resonance read off one LPC root.
struct FormantCandidate {
  double f_hz = 0.0;
  double bandwidth_hz = 0.0;
};

/// Roots of z^p - a1 z^{p-1} - ... - ap, i.e. the poles of 1/A(z) for
/// predictor coefficients a.
std::vector<std::complex<double>> lpc_poles(const Eigen::VectorXd& predictor);

/// Candidates of one LPC model, ascending in frequency.
std::vector<FormantCandidate> formant_candidates(const LpcModel& model, int sample_rate_hz,
                                                 const FormantOptions& options = {});

/// Utterance-level F1..F5: per-frame candidates, per-slot medians over the
/// voiced frames holding at least five candidates.
FormantSet estimate_formants(const AudioClip& clip, double frame_ms = 25.0,
                             const FormantOptions& options = {});

}  // namespace dys

#endif  // DYS_FORMANT_HPP
