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

#include "dys/glottal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dys/dsp.hpp"

namespace dys {
namespace {

constexpr double kMinPeriodMs = 2.5;
constexpr double kMaxPeriodMs = 16.7;

Eigen::Index odd_length(double len) {
  auto n = static_cast<Eigen::Index>(std::lround(len));
  if (n < 3) n = 3;
  if (n % 2 == 0) ++n;
  return n;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

int residual_lpc_order(int sample_rate_hz) { return 2 + sample_rate_hz / 1000; }

Eigen::VectorXd mean_based_signal(const Eigen::VectorXd& x, Eigen::Index window_len) {
  const Eigen::VectorXd w = make_window(Window::Blackman, window_len);
  const Eigen::Index half = window_len / 2;
  const Eigen::Index n = x.size();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half);
    const auto len = hi - lo + 1;
    const auto wseg = w.segment(lo - (i - half), len);
    const double norm = wseg.sum();
    y(i) = norm > 0.0 ? x.segment(lo, len).dot(wseg) / norm : 0.0;
  }
  return y;
}

GciSequence detect_gci(const AudioClip& clip, const GciOptions& opt) {
  GciSequence out;
  out.sample_rate_hz = clip.sample_rate_hz;
  if (clip.empty() || clip.sample_rate_hz <= 0) return out;
  if (clip.duration_s() < 0.1) return out;
  if (!clip.samples.allFinite()) throw Error("detect_gci: non-finite samples");
  const int fs = clip.sample_rate_hz;
  Eigen::VectorXd x = clip.samples.array() - clip.samples.mean();
  if (!(x.squaredNorm() > 0.0)) return out;

  PitchOptions popt;
  popt.f_min_hz = opt.f_min_hz;
  popt.f_max_hz = std::min(opt.f_max_hz, 0.45 * fs);
  const PitchTrack track = track_pitch(clip, popt);
  std::vector<double> voiced;
  for (double f : track.f0_hz) {
    if (f > 0.0) voiced.push_back(f);
  }
  if (voiced.empty()) return out;
  std::sort(voiced.begin(), voiced.end());
  out.mean_pitch_hz = voiced[voiced.size() / 2];
  const double period = fs / out.mean_pitch_hz;

  Eigen::VectorXd residual =
      lpc_residual(x, fs, residual_lpc_order(fs), opt.lpc_frame_ms, opt.lpc_hop_ms);
  // Polarity: dominant residual excursions must point down.
  {
    const double m = residual.mean();
    const Eigen::ArrayXd c = residual.array() - m;
    const double sd = std::sqrt((c * c).mean());
    const double skew = sd > 0.0 ? (c * c * c).mean() / (sd * sd * sd) : 0.0;
    if (skew > 0.0) {
      residual = -residual;
      x = -x;
    }
  }

  Eigen::VectorXd mbs = mean_based_signal(x, odd_length(opt.mbs_window_periods * period));
  // A boxcar two periods long has a null at f0, so subtracting it removes
  // drift without touching the oscillation we segment on.
  mbs -= moving_average(mbs, odd_length(2.0 * period));

  const auto lead = static_cast<Eigen::Index>(std::lround(opt.interval_lead * period));
  const Eigen::Index n = x.size();
  std::vector<std::pair<Eigen::Index, double>> found;
  Eigen::Index i = 0;
  while (i < n) {
    if (mbs(i) >= 0.0) {
      ++i;
      continue;
    }
    const Eigen::Index lobe_start = i;
    while (i < n && mbs(i) < 0.0) ++i;
    const Eigen::Index lobe_end = i - 1;  // last negative sample; i is the zero crossing
    Eigen::Index minimum = lobe_start;
    for (Eigen::Index k = lobe_start; k <= lobe_end; ++k) {
      if (mbs(k) < mbs(minimum)) minimum = k;
    }
    if (!track.voiced_at(minimum)) continue;
    const Eigen::Index lo = std::max<Eigen::Index>(0, minimum - lead);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i);
    Eigen::Index best = lo;
    for (Eigen::Index k = lo; k <= hi; ++k) {
      if (residual(k) < residual(best)) best = k;
    }
    if (residual(best) < 0.0) found.emplace_back(best, -residual(best));
  }

  std::sort(found.begin(), found.end());
  const double min_gap = fs * kMinPeriodMs / 1000.0;
  for (const auto& [pos, amp] : found) {
    if (!out.instants.empty() && static_cast<double>(pos - out.instants.back()) < min_gap) {
      if (amp > out.pulse_amplitudes.back()) {
        out.instants.back() = pos;
        out.pulse_amplitudes.back() = amp;
      }
      continue;
    }
    out.instants.push_back(pos);
    out.pulse_amplitudes.push_back(amp);
  }
  return out;
}

GlottalParams extract_glottal_params(const GciSequence& gci, const AudioClip& clip) {
  GlottalParams p;
  if (gci.empty()) return p;
  const int fs = gci.sample_rate_hz > 0 ? gci.sample_rate_hz : clip.sample_rate_hz;
  if (fs <= 0) throw Error("extract_glottal_params: unknown sample rate");

  std::vector<double> periods;
  std::vector<double> period_deltas;
  std::vector<double> amp_deltas;
  bool prev_accepted = false;
  double prev_period = 0.0;
  for (std::size_t k = 1; k < gci.size(); ++k) {
    const double t = 1000.0 * static_cast<double>(gci.instants[k] - gci.instants[k - 1]) / fs;
    const bool accepted = t >= kMinPeriodMs && t <= kMaxPeriodMs;
    if (accepted) {
      periods.push_back(t);
      amp_deltas.push_back(std::abs(gci.pulse_amplitudes[k] - gci.pulse_amplitudes[k - 1]));
      if (prev_accepted) period_deltas.push_back(std::abs(t - prev_period));
      prev_period = t;
    }
    prev_accepted = accepted;
  }
  p.mean_pulse_amplitude = mean_of(gci.pulse_amplitudes);
  p.pulse_amplitude_std = std_of(gci.pulse_amplitudes);
  if (!periods.empty()) {
    p.mean_period_ms = mean_of(periods);
    p.period_std_ms = std_of(periods);
    if (!period_deltas.empty()) p.jitter_local_pct = 100.0 * mean_of(period_deltas) / p.mean_period_ms;
    if (p.mean_pulse_amplitude > 0.0) {
      p.shimmer_local_pct = 100.0 * mean_of(amp_deltas) / p.mean_pulse_amplitude;
    }
  }

  const Eigen::Index frame = samples_for_ms(20.0, fs);
  const Eigen::Index hop = samples_for_ms(10.0, fs);
  const Eigen::Index n_frames = frame_count(clip.size(), frame, hop);
  if (n_frames > 0) {
    Eigen::Index with_instant = 0;
    for (Eigen::Index f = 0; f < n_frames; ++f) {
      const Eigen::Index start = f * hop;
      auto it = std::lower_bound(gci.instants.begin(), gci.instants.end(), start);
      if (it != gci.instants.end() && *it < start + frame) ++with_instant;
    }
    p.voiced_fraction = static_cast<double>(with_instant) / static_cast<double>(n_frames);
  }
  return p;
}

}  // namespace dys
