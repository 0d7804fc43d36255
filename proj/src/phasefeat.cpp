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

#include "dys/phasefeat.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace dys {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = 1e-8;

using ComplexVector = Eigen::VectorXcd;

struct Spectra {
  ComplexVector x;  // DFT of x[n]
  ComplexVector y;  // DFT of n x[n]
};

Spectra spectra_of(const Eigen::VectorXd& frame, Eigen::Index n_fft) {
  if (frame.size() == 0) throw Error("group delay: empty frame");
  if (frame.size() > n_fft) throw Error("group delay: frame longer than n_fft");
  if (!frame.allFinite()) throw Error("group delay: non-finite samples");
  if (!(frame.squaredNorm() > 0.0)) throw Error("group delay: all-zero frame");
  const Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(frame.size(), 0.0, static_cast<double>(frame.size() - 1));
  return {rfft(frame, n_fft), rfft(Eigen::VectorXd(frame.cwiseProduct(ramp)), n_fft)};
}

Eigen::VectorXd cross_term(const Spectra& s) {
  return (s.x.real().cwiseProduct(s.y.real()) + s.x.imag().cwiseProduct(s.y.imag()));
}

// Low-time liftered magnitude: keep the first `lifter_len` real-cepstrum
// coefficients (and their mirror images) of log|X|.
Eigen::VectorXd smoothed_magnitude(const ComplexVector& x, Eigen::Index n_fft, int lifter_len) {
  const Eigen::VectorXd mag = x.cwiseAbs();
  if (lifter_len <= 0) return mag;
  const double peak = mag.maxCoeff();
  if (!(peak > 0.0)) throw Error("modified group delay: degenerate (all-zero) smoothed spectrum");
  const Eigen::VectorXd logmag = mag.cwiseMax(1e-10 * peak).array().log();
  Eigen::VectorXcd half = logmag.cast<std::complex<double>>();
  Eigen::VectorXd ceps = irfft(half, n_fft);
  const Eigen::Index keep = std::min<Eigen::Index>(lifter_len, n_fft / 2);
  for (Eigen::Index n = keep; n <= n_fft - keep; ++n) ceps(n) = 0.0;
  const Eigen::VectorXcd smooth_log = rfft(ceps, n_fft);
  return smooth_log.real().array().exp();
}

}  // namespace

double princarg(double phase) {
  double p = std::remainder(phase, 2.0 * kPi);  // [-pi, pi]
  if (p <= -kPi) p += 2.0 * kPi;
  return p;
}

Eigen::VectorXd unwrap_phase(const Eigen::VectorXd& phase) {
  Eigen::VectorXd out = phase;
  double offset = 0.0;
  for (Eigen::Index k = 1; k < phase.size(); ++k) {
    const double jump = phase(k) - phase(k - 1);
    if (jump > kPi) offset -= 2.0 * kPi * std::round(jump / (2.0 * kPi));
    else if (jump < -kPi) offset += 2.0 * kPi * std::round(-jump / (2.0 * kPi));
    out(k) = phase(k) + offset;
  }
  return out;
}

Eigen::VectorXd group_delay_spectrum(const Eigen::VectorXd& frame, Eigen::Index n_fft) {
  const Spectra s = spectra_of(frame, n_fft);
  const Eigen::VectorXd power = s.x.cwiseAbs2();
  const double floor = kEps * power.maxCoeff();
  return cross_term(s).array() / (power.array() + floor);
}

Eigen::VectorXd modified_group_delay(const Eigen::VectorXd& frame, Eigen::Index n_fft,
                                     const MgdParams& params) {
  if (!(params.alpha > 0.0 && params.alpha <= 1.0) || !(params.gamma > 0.0 && params.gamma <= 1.0)) {
    throw Error("modified group delay: alpha and gamma must lie in (0, 1]");
  }
  const Spectra s = spectra_of(frame, n_fft);
  const Eigen::VectorXd smooth = smoothed_magnitude(s.x, n_fft, params.lifter_len);
  const Eigen::ArrayXd denom = smooth.array().pow(2.0 * params.gamma);
  const double peak = denom.maxCoeff();
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw Error("modified group delay: degenerate (all-zero) smoothed spectrum");
  }
  const Eigen::ArrayXd g = cross_term(s).array() / (denom + kEps * peak);
  return g.sign() * g.abs().pow(params.alpha);
}

Eigen::VectorXd frame_phase(const Eigen::VectorXd& frame, Eigen::Index n_fft, Window window) {
  const Eigen::VectorXd w = make_window(window, frame.size());
  const Eigen::VectorXcd spec = rfft(Eigen::VectorXd(frame.cwiseProduct(w)), n_fft);
  return spec.unaryExpr([](const std::complex<double>& c) { return std::arg(c); }).real();
}

Eigen::VectorXd if_deviation(const Eigen::VectorXd& phase, const std::optional<Eigen::VectorXd>& prev_phase,
                             Eigen::Index hop_len, int sample_rate_hz) {
  const Eigen::Index bins = phase.size();
  Eigen::VectorXd dev = Eigen::VectorXd::Zero(bins);
  if (!prev_phase) return dev;
  if (prev_phase->size() != bins) throw Error("if_deviation: previous phase has a different bin count");
  const Eigen::Index n_fft = 2 * (bins - 1);
  const double to_hz = sample_rate_hz / (2.0 * kPi * static_cast<double>(hop_len));
  for (Eigen::Index k = 0; k < bins; ++k) {
    const double expected = 2.0 * kPi * static_cast<double>(k * hop_len) / static_cast<double>(n_fft);
    dev(k) = princarg(phase(k) - (*prev_phase)(k) - expected) * to_hz;
  }
  return dev;
}

PhaseVector PhaseFrame::to_vector() const {
  PhaseVector v;
  v << pcc, gdcc, mgd, inst_freq, phase_coherence, spectral_entropy;
  return v;
}

std::vector<std::string> PhaseFrame::column_names() {
  std::vector<std::string> names;
  for (const char* prefix : {"pcc_", "gdcc_", "mgd_", "if_"}) {
    for (Eigen::Index i = 0; i < kPhaseCoeffs; ++i) names.push_back(prefix + std::to_string(i));
  }
  names.emplace_back("coherence");
  names.emplace_back("entropy");
  return names;
}

PhaseFrame phase_frame(const Eigen::VectorXd& frame, const std::optional<Eigen::VectorXd>& prev_phase,
                       Eigen::Index n_fft, Eigen::Index hop_len, const PhaseOptions& opt) {
  if (frame.size() == 0 || frame.size() > n_fft) throw Error("phase_frame: frame must be 1..n_fft samples");
  if (!is_power_of_two(n_fft)) throw Error("phase_frame: n_fft must be a power of two");
  if (hop_len <= 0) throw Error("phase_frame: hop must be positive");
  if (!frame.allFinite()) throw Error("phase_frame: non-finite samples");
  PhaseFrame out;
  const Eigen::VectorXd windowed = frame.cwiseProduct(make_window(opt.window, frame.size()));
  const double rms = std::sqrt(windowed.squaredNorm() / static_cast<double>(windowed.size()));
  if (!(rms > 0.0)) return out;  // silence pads as zeros
  const Eigen::VectorXd x = windowed / rms;

  const Eigen::VectorXcd spec = rfft(x, n_fft);
  const Eigen::VectorXd phase = spec.unaryExpr([](const std::complex<double>& c) { return std::arg(c); }).real();
  out.pcc = dct_ii(unwrap_phase(phase), kPhaseCoeffs);
  out.gdcc = dct_ii(group_delay_spectrum(x, n_fft), kPhaseCoeffs);
  out.mgd = dct_ii(modified_group_delay(x, n_fft, opt.mgd), kPhaseCoeffs);

  const Eigen::VectorXd dev = if_deviation(phase, prev_phase, hop_len, opt.sample_rate_hz);
  out.inst_freq = dct_ii(dev, kPhaseCoeffs);
  const double to_rad = 2.0 * kPi * static_cast<double>(hop_len) / opt.sample_rate_hz;
  std::complex<double> acc = 0.0;
  for (Eigen::Index k = 0; k < dev.size(); ++k) acc += std::polar(1.0, dev(k) * to_rad);
  out.phase_coherence = std::abs(acc) / static_cast<double>(dev.size());

  const Eigen::ArrayXd power = spec.cwiseAbs2();
  const double total = power.sum();
  double h = 0.0;
  for (Eigen::Index k = 0; k < power.size(); ++k) {
    const double p = power(k) / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  out.spectral_entropy = h;
  return out;
}

PhaseFrameMatrix utterance_phase_matrix(const AudioClip& clip, const PhaseOptions& opt) {
  if (clip.empty()) throw Error("utterance_phase_matrix: empty clip");
  clip.validate();
  const AudioClip audio = resample(clip, opt.sample_rate_hz);
  const Eigen::Index frame_len = samples_for_ms(opt.frame_ms, opt.sample_rate_hz);
  const Eigen::Index hop_len = samples_for_ms(opt.hop_ms, opt.sample_rate_hz);
  if (frame_len > opt.n_fft) throw Error("utterance_phase_matrix: n_fft smaller than the frame");
  PhaseFrameMatrix out;
  const Eigen::Index n_frames = std::min(kPhaseFrames, frame_count(audio.size(), frame_len, hop_len));
  std::optional<Eigen::VectorXd> prev;
  for (Eigen::Index t = 0; t < n_frames; ++t) {
    const Eigen::VectorXd frame = audio.samples.segment(t * hop_len, frame_len);
    out.frames.row(t) = phase_frame(frame, prev, opt.n_fft, hop_len, opt).to_vector().transpose();
    prev = frame_phase(frame, opt.n_fft, opt.window);
  }
  out.valid_frame_count = n_frames;
  return out;
}

}  // namespace dys
