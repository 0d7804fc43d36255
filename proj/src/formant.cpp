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

#include "dys/formant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace dys {
namespace {

using cd = std::complex<double>;

// Monic polynomial z^p + c1 z^{p-1} + ... + cp by Horner, with derivative.
std::pair<cd, cd> horner(const Eigen::VectorXd& c, cd z) {
  cd p = 1.0;
  cd dp = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    dp = dp * z + p;
    p = p * z + c(k);
  }
  return {p, dp};
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<std::complex<double>> lpc_poles(const Eigen::VectorXd& predictor) {
  const Eigen::Index p = predictor.size();
  if (p == 0) return {};
  const Eigen::VectorXd c = -predictor;  // monic coefficients c1..cp
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  companion.row(0) = -c.transpose();
  for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw Error("lpc_poles: eigenvalue iteration failed");
  std::vector<cd> roots(solver.eigenvalues().data(), solver.eigenvalues().data() + p);
  // A few Newton steps take the QR roots down to the residual tolerance.
  for (cd& z : roots) {
    for (int it = 0; it < 8; ++it) {
      const auto [f, df] = horner(c, z);
      if (std::abs(f) < 1e-10 || std::abs(df) == 0.0) break;
      const cd step = f / df;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
      z -= step;
    }
  }
  return roots;
}

std::vector<FormantCandidate> formant_candidates(const LpcModel& model, int fs,
                                                 const FormantOptions& opt) {
  std::vector<FormantCandidate> out;
  const double nyquist = 0.5 * fs;
  for (const cd& r : lpc_poles(model.coefficients)) {
    if (r.imag() <= 0.0) continue;  // one of each conjugate pair
    const double mag = std::abs(r);
    if (!(mag > 0.0)) continue;
    const double f = std::arg(r) * fs / (2.0 * std::numbers::pi);
    const double bw = -std::log(mag) * fs / std::numbers::pi;
    if (f <= opt.edge_margin_hz || f >= nyquist - opt.edge_margin_hz) continue;
    if (!(bw > 0.0) || bw >= opt.max_bandwidth_hz) continue;
    out.push_back({f, bw});
  }
  std::sort(out.begin(), out.end(),
            [](const FormantCandidate& a, const FormantCandidate& b) { return a.f_hz < b.f_hz; });
  return out;
}

FormantSet estimate_formants(const AudioClip& clip, double frame_ms, const FormantOptions& opt) {
  clip.validate();
  if (!(frame_ms > 0.0)) throw Error("estimate_formants: frame length must be positive");
  const AudioClip analysis = resample(clip, opt.analysis_rate_hz);
  const int fs = analysis.sample_rate_hz;
  const Eigen::Index frame_len = samples_for_ms(frame_ms, fs);
  const Eigen::Index hop = samples_for_ms(opt.hop_ms, fs);
  if (frame_len <= opt.lpc_order) throw Error("estimate_formants: frame shorter than the LPC order");
  if (analysis.size() < frame_len) {
    throw PartialFormantError(0, "estimate_formants: clip shorter than one analysis frame");
  }

  const Eigen::VectorXd x = preemphasis(analysis.samples.array() - analysis.samples.mean(),
                                        opt.preemphasis);
  const PitchTrack pitch = track_pitch(analysis);
  const Eigen::VectorXd window = make_window(Window::Hamming, frame_len);
  const Eigen::Index n_frames = frame_count(x.size(), frame_len, hop);

  std::vector<double> energy(static_cast<std::size_t>(n_frames));
  for (Eigen::Index f = 0; f < n_frames; ++f) {
    energy[static_cast<std::size_t>(f)] = x.segment(f * hop, frame_len).squaredNorm() / frame_len;
  }
  const double peak = *std::max_element(energy.begin(), energy.end());
  const double gate = peak * std::pow(10.0, opt.energy_gate_db / 10.0);

  std::array<std::vector<double>, 5> freqs;
  std::array<std::vector<double>, 5> bws;
  std::size_t most = 0;
  int used = 0;
  for (Eigen::Index f = 0; f < n_frames; ++f) {
    if (!(energy[static_cast<std::size_t>(f)] > gate) || !(peak > 0.0)) continue;
    if (!pitch.voiced_at(f * hop + frame_len / 2)) continue;
    const Eigen::VectorXd frame = x.segment(f * hop, frame_len).cwiseProduct(window);
    Eigen::VectorXd r = autocorrelation(frame, opt.lpc_order);
    if (!(r(0) > 0.0)) continue;
    r(0) *= 1.0 + 1e-9;  // keeps near-singular frames well conditioned
    const LpcModel model = levinson_durbin(r, opt.lpc_order);
    const auto cands = formant_candidates(model, fs, opt);
    most = std::max(most, cands.size());
    if (cands.size() < 5) continue;
    ++used;
    for (std::size_t k = 0; k < 5; ++k) {
      freqs[k].push_back(cands[k].f_hz);
      bws[k].push_back(cands[k].bandwidth_hz);
    }
  }
  if (used == 0) {
    throw PartialFormantError(static_cast<int>(most),
                              "estimate_formants: partial formant set, only " + std::to_string(most) +
                                  " of 5 formants found in any frame");
  }
  FormantSet out;
  out.n_voiced_frames_used = used;
  for (std::size_t k = 0; k < 5; ++k) {
    out.f_hz[k] = median_of(freqs[k]);
    out.bandwidths_hz[k] = median_of(bws[k]);
  }
  return out;
}

}  // namespace dys
