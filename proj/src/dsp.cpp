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

#include "dys/dsp.hpp"

#include <algorithm>
#include <numeric>

namespace dys {
namespace {

constexpr double kPi = std::numbers::pi;

double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  for (int k = 1; k < 50; ++k) {
    term *= (x / (2.0 * k)) * (x / (2.0 * k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// Direct-form II transposed biquad.
struct Biquad {
  double b0, b1, b2, a1, a2;

  void run(Eigen::VectorXd& x) const {
    double z1 = 0.0, z2 = 0.0;
    for (Eigen::Index n = 0; n < x.size(); ++n) {
      const double in = x(n);
      const double out = b0 * in + z1;
      z1 = b1 * in - a1 * out + z2;
      z2 = b2 * in - a2 * out;
      x(n) = out;
    }
  }
};

Biquad butterworth_lowpass_section(double cutoff_hz, int fs, double q) {
  const double w0 = 2.0 * kPi * cutoff_hz / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  return {(1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0, -2.0 * c / a0,
          (1.0 - alpha) / a0};
}

}  // namespace

Eigen::VectorXd make_window(Window window, Eigen::Index n) {
  Eigen::VectorXd w(n);
  if (n == 1) {
    w(0) = 1.0;
    return w;
  }
  const double m = static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = 2.0 * kPi * static_cast<double>(i) / m;
    switch (window) {
      case Window::Hann: w(i) = 0.5 - 0.5 * std::cos(x); break;
      case Window::Hamming: w(i) = 0.54 - 0.46 * std::cos(x); break;
      case Window::Blackman: w(i) = 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x); break;
      case Window::Rectangular: w(i) = 1.0; break;
    }
  }
  return w;
}

Eigen::Index samples_for_ms(double ms, int sample_rate_hz) {
  return static_cast<Eigen::Index>(std::lround(ms * sample_rate_hz / 1000.0));
}

Eigen::Index frame_count(Eigen::Index n, Eigen::Index frame_len, Eigen::Index hop_len) {
  if (frame_len <= 0 || hop_len <= 0) throw Error("frame and hop lengths must be positive");
  if (n < frame_len) return 0;
  return (n - frame_len) / hop_len + 1;
}

FrameSequence frame_signal(const AudioClip& clip, double frame_ms, double hop_ms) {
  if (clip.sample_rate_hz <= 0) throw Error("frame_signal: invalid sample rate");
  if (!(frame_ms > 0) || !(hop_ms > 0)) throw Error("frame_signal: frame and hop must be positive");
  FrameSequence fs;
  fs.frame_ms = frame_ms;
  fs.hop_ms = hop_ms;
  fs.sample_rate_hz = clip.sample_rate_hz;
  fs.frame_len = samples_for_ms(frame_ms, clip.sample_rate_hz);
  fs.hop_len = samples_for_ms(hop_ms, clip.sample_rate_hz);
  if (fs.frame_len <= 0 || fs.hop_len <= 0) throw Error("frame_signal: frame shorter than a sample");
  const Eigen::Index n = frame_count(clip.size(), fs.frame_len, fs.hop_len);
  if (n == 0) {
    throw Error("frame_signal: clip of " + std::to_string(clip.size()) +
                " samples is shorter than one frame (" + std::to_string(fs.frame_len) + ")");
  }
  fs.frames.resize(n, fs.frame_len);
  for (Eigen::Index i = 0; i < n; ++i) {
    fs.frames.row(i) = clip.samples.segment(i * fs.hop_len, fs.frame_len).transpose();
  }
  return fs;
}

Spectrogram stft(const AudioClip& clip, double frame_ms, double hop_ms, Eigen::Index n_fft,
                 Window window) {
  if (!is_power_of_two(n_fft)) throw Error("stft: n_fft must be a power of two");
  const Eigen::Index frame_len = samples_for_ms(frame_ms, clip.sample_rate_hz);
  if (n_fft < frame_len) {
    throw Error("stft: n_fft " + std::to_string(n_fft) + " smaller than frame length " +
                std::to_string(frame_len));
  }
  const FrameSequence frames = frame_signal(clip, frame_ms, hop_ms);
  const Eigen::VectorXd w = make_window(window, frames.frame_len);
  Spectrogram s;
  s.n_fft = n_fft;
  s.sample_rate_hz = clip.sample_rate_hz;
  const Eigen::Index bins = n_fft / 2 + 1;
  s.magnitudes.resize(frames.size(), bins);
  s.phases.resize(frames.size(), bins);
  for (Eigen::Index i = 0; i < frames.size(); ++i) {
    const Eigen::VectorXd x = frames.frames.row(i).transpose().cwiseProduct(w);
    const Eigen::VectorXcd spec = rfft(x, n_fft);
    for (Eigen::Index k = 0; k < bins; ++k) {
      s.magnitudes(i, k) = std::abs(spec(k));
      double ph = std::arg(spec(k));
      if (ph <= -kPi) ph += 2.0 * kPi;
      s.phases(i, k) = ph;
    }
  }
  return s;
}

AudioClip trim_silence(const AudioClip& clip, double threshold_db, double min_voiced_ms) {
  clip.validate();
  const Eigen::Index frame = std::max<Eigen::Index>(1, samples_for_ms(10.0, clip.sample_rate_hz));
  const Eigen::Index n_frames = (clip.size() + frame - 1) / frame;
  std::vector<double> rms(static_cast<std::size_t>(n_frames));
  for (Eigen::Index i = 0; i < n_frames; ++i) {
    const Eigen::Index start = i * frame;
    const Eigen::Index len = std::min(frame, clip.size() - start);
    rms[static_cast<std::size_t>(i)] =
        std::sqrt(clip.samples.segment(start, len).squaredNorm() / static_cast<double>(len));
  }
  const double peak = *std::max_element(rms.begin(), rms.end());
  if (!(peak > 0.0)) throw Error("trim_silence: clip is entirely silent");
  const double threshold = peak * std::pow(10.0, threshold_db / 20.0);
  const auto min_run = static_cast<Eigen::Index>(
      std::max(1.0, std::ceil(min_voiced_ms / 10.0 - 1e-9)));

  Eigen::Index first = -1, last = -1;
  Eigen::Index run_start = 0, run = 0;
  for (Eigen::Index i = 0; i <= n_frames; ++i) {
    const bool above = i < n_frames && rms[static_cast<std::size_t>(i)] > threshold;
    if (above) {
      if (run == 0) run_start = i;
      ++run;
      continue;
    }
    if (run >= min_run || (run > 0 && run == n_frames)) {
      if (first < 0) first = run_start;
      last = i - 1;
    }
    run = 0;
  }
  if (first < 0) {
    // No run is long enough; fall back to the single loudest region.
    for (Eigen::Index i = 0; i < n_frames; ++i) {
      if (rms[static_cast<std::size_t>(i)] > threshold) {
        if (first < 0) first = i;
        last = i;
      }
    }
  }
  if (first < 0) throw Error("trim_silence: no frame exceeds the threshold");
  const Eigen::Index begin = first * frame;
  const Eigen::Index end = std::min(clip.size(), (last + 1) * frame);
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples = clip.samples.segment(begin, end - begin);
  return out;
}

// ---------------------------------------------------------------------------

std::size_t PitchTrack::frame_at(Eigen::Index sample) const {
  if (f0_hz.empty()) return 0;
  const double center_offset = static_cast<double>(frame_len) / 2.0;
  const double idx = (static_cast<double>(sample) - center_offset) / static_cast<double>(hop_len);
  const auto i = static_cast<long>(std::lround(idx));
  return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(f0_hz.size()) - 1));
}

bool PitchTrack::voiced_at(Eigen::Index sample) const {
  return !f0_hz.empty() && f0_hz[frame_at(sample)] > 0.0;
}

std::size_t PitchTrack::voiced_count() const {
  return static_cast<std::size_t>(
      std::count_if(f0_hz.begin(), f0_hz.end(), [](double f) { return f > 0.0; }));
}

namespace {

// Normalized cross-correlation between x[0, n-lag) and x[lag, n) for all
// lags in [lag_min, lag_max].
Eigen::VectorXd normalized_correlation(const Eigen::VectorXd& x, Eigen::Index lag_min,
                                       Eigen::Index lag_max) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(lag_max + 1);
  Eigen::Index n_fft = 1;
  while (n_fft < 2 * n) n_fft <<= 1;
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(n_fft));
  for (Eigen::Index i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = x(i);
  fft_inplace(buf);
  for (auto& v : buf) v = std::norm(v);
  fft_inplace(buf, true);
  Eigen::VectorXd prefix(n + 1);
  prefix(0) = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) prefix(i + 1) = prefix(i) + x(i) * x(i);
  for (Eigen::Index lag = lag_min; lag <= lag_max && lag < n; ++lag) {
    const double head = prefix(n - lag);
    const double tail = prefix(n) - prefix(lag);
    const double denom = std::sqrt(head * tail);
    out(lag) = denom > 0.0 ? buf[static_cast<std::size_t>(lag)].real() / denom : 0.0;
  }
  return out;
}

}  // namespace

namespace {
constexpr double kOctaveRatio = 0.85;
}  // namespace

PitchTrack track_pitch(const AudioClip& clip, const PitchOptions& opt) {
  clip.validate();
  const int fs = clip.sample_rate_hz;
  if (!(opt.f_min_hz > 0) || !(opt.f_min_hz < opt.f_max_hz) || opt.f_max_hz >= fs / 2.0) {
    throw Error("track_pitch: need 0 < f_min < f_max < Nyquist");
  }
  PitchTrack track;
  track.sample_rate_hz = fs;
  track.frame_len = static_cast<Eigen::Index>(std::ceil(3.0 * fs / opt.f_min_hz));
  track.hop_len = std::max<Eigen::Index>(1, samples_for_ms(opt.hop_ms, fs));
  const Eigen::Index lag_min = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::floor(fs / opt.f_max_hz)));
  const Eigen::Index lag_max = static_cast<Eigen::Index>(std::ceil(fs / opt.f_min_hz));

  Eigen::VectorXd x = clip.samples.array() - clip.samples.mean();
  if (x.size() < track.frame_len) {
    // Short clips are analyzed as one zero-padded frame.
    Eigen::VectorXd padded = Eigen::VectorXd::Zero(track.frame_len);
    padded.head(x.size()) = x;
    x = padded;
  }
  const Eigen::VectorXd low = lowpass_zero_phase(x, opt.lowpass_hz, fs);
  const Eigen::Index n_frames = frame_count(x.size(), track.frame_len, track.hop_len);

  std::vector<double> energy(static_cast<std::size_t>(n_frames));
  for (Eigen::Index i = 0; i < n_frames; ++i) {
    energy[static_cast<std::size_t>(i)] =
        x.segment(i * track.hop_len, track.frame_len).squaredNorm();
  }
  const double peak = energy.empty() ? 0.0 : *std::max_element(energy.begin(), energy.end());
  const double gate = peak * std::pow(10.0, opt.silence_db / 10.0);

  track.f0_hz.assign(static_cast<std::size_t>(n_frames), 0.0);
  track.correlation.assign(static_cast<std::size_t>(n_frames), 0.0);
  for (Eigen::Index i = 0; i < n_frames; ++i) {
    const auto fi = static_cast<std::size_t>(i);
    if (!(energy[fi] > 0.0) || energy[fi] < gate) continue;
    const Eigen::VectorXd seg = low.segment(i * track.hop_len, track.frame_len);
    const Eigen::VectorXd ncc = normalized_correlation(seg, lag_min, lag_max);
    // Subharmonic guard: the shortest local peak close to the global maximum
    // wins, so period doubling under jitter does not halve f0.
    const Eigen::Index last = std::min<Eigen::Index>(lag_max, seg.size() - 1);
    Eigen::Index best = -1;
    double global = -1.0;
    for (Eigen::Index lag = lag_min; lag <= last; ++lag) global = std::max(global, ncc(lag));
    for (Eigen::Index lag = lag_min; lag <= last; ++lag) {
      const bool peak_left = lag == lag_min || ncc(lag) >= ncc(lag - 1);
      const bool peak_right = lag == last || ncc(lag) >= ncc(lag + 1);
      if (peak_left && peak_right && ncc(lag) >= kOctaveRatio * global) {
        best = lag;
        break;
      }
    }
    if (best < 0) continue;
    track.correlation[fi] = ncc(best);
    if (ncc(best) < opt.voicing_threshold) continue;
    // The full band must show some periodicity near the same lag; low-passed
    // noise alone is strongly self-similar at short lags.
    const Eigen::VectorXd raw = x.segment(i * track.hop_len, track.frame_len);
    const Eigen::Index tol = std::max<Eigen::Index>(2, best / 25);
    const Eigen::VectorXd raw_ncc =
        normalized_correlation(raw, std::max(lag_min, best - tol), std::min(lag_max, best + tol));
    if (raw_ncc.maxCoeff() < opt.raw_threshold) continue;
    double lag = static_cast<double>(best);
    if (best > lag_min && best < lag_max) {
      const double a = ncc(best - 1), b = ncc(best), c = ncc(best + 1);
      const double denom = a - 2.0 * b + c;
      if (denom < 0.0) lag += 0.5 * (a - c) / denom;
    }
    track.f0_hz[fi] = fs / lag;
  }
  return track;
}

std::optional<double> estimate_mean_pitch(const AudioClip& clip, double f_min, double f_max) {
  PitchOptions opt;
  opt.f_min_hz = f_min;
  opt.f_max_hz = f_max;
  const PitchTrack track = track_pitch(clip, opt);
  std::vector<double> voiced;
  for (double f : track.f0_hz) {
    if (f > 0.0) voiced.push_back(f);
  }
  if (voiced.empty()) return std::nullopt;
  const auto mid = voiced.begin() + static_cast<std::ptrdiff_t>(voiced.size() / 2);
  std::nth_element(voiced.begin(), mid, voiced.end());
  if (voiced.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(voiced.begin(), mid);
  return 0.5 * (lower + upper);
}

// ---------------------------------------------------------------------------

AudioClip resample(const AudioClip& clip, int target_rate_hz) {
  if (clip.sample_rate_hz <= 0 || target_rate_hz <= 0) throw Error("resample: rates must be positive");
  if (target_rate_hz == clip.sample_rate_hz) return clip;
  const double ratio = static_cast<double>(target_rate_hz) / clip.sample_rate_hz;
  const Eigen::Index n_in = clip.size();
  const auto n_out = static_cast<Eigen::Index>(std::llround(static_cast<double>(n_in) * ratio));
  // Cutoff in cycles per input sample, a little under the lower Nyquist.
  const double cutoff = 0.5 * std::min(1.0, ratio) * 0.95;
  constexpr double kZeroCrossings = 16.0;
  const double half_width = kZeroCrossings / (2.0 * cutoff);
  constexpr double kBeta = 8.6;
  const double i0_beta = bessel_i0(kBeta);

  auto tap = [&](double d) {
    const double arg = 2.0 * cutoff * d;
    const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(kPi * arg) / (kPi * arg);
    const double u = d / half_width;
    return 2.0 * cutoff * sinc * bessel_i0(kBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0_beta;
  };

  AudioClip out;
  out.sample_rate_hz = target_rate_hz;
  out.samples.resize(n_out);
  // Output m sits at input time m*q/p; its fractional part cycles through p
  // phases, so the kernel is tabulated once per phase.
  const int g = std::gcd(clip.sample_rate_hz, target_rate_hz);
  const Eigen::Index p = target_rate_hz / g;
  const Eigen::Index q = clip.sample_rate_hz / g;
  const auto taps = static_cast<Eigen::Index>(std::ceil(2.0 * half_width)) + 2;
  if (p <= 4096) {
    Eigen::MatrixXd table(taps, p);
    Eigen::VectorXi first(p);
    for (Eigen::Index ph = 0; ph < p; ++ph) {
      const double frac = static_cast<double>(ph) / static_cast<double>(p);
      const auto k0 = static_cast<Eigen::Index>(std::ceil(frac - half_width));
      first(ph) = static_cast<int>(k0);
      for (Eigen::Index j = 0; j < taps; ++j) {
        const double d = frac - static_cast<double>(k0 + j);
        table(j, ph) = std::abs(d) <= half_width ? tap(d) : 0.0;
      }
    }
    for (Eigen::Index m = 0; m < n_out; ++m) {
      const Eigen::Index base = m * q / p;
      const Eigen::Index ph = m * q % p;
      const Eigen::Index k0 = base + first(ph);
      double acc = 0.0;
      for (Eigen::Index j = std::max<Eigen::Index>(0, -k0); j < taps && k0 + j < n_in; ++j) {
        acc += clip.samples(k0 + j) * table(j, ph);
      }
      out.samples(m) = acc;
    }
    return out;
  }
  for (Eigen::Index m = 0; m < n_out; ++m) {
    const double t = static_cast<double>(m) / ratio;
    const auto k_lo = static_cast<Eigen::Index>(std::ceil(t - half_width));
    const auto k_hi = static_cast<Eigen::Index>(std::floor(t + half_width));
    double acc = 0.0;
    for (Eigen::Index k = std::max<Eigen::Index>(0, k_lo); k <= std::min(n_in - 1, k_hi); ++k) {
      acc += clip.samples(k) * tap(t - static_cast<double>(k));
    }
    out.samples(m) = acc;
  }
  return out;
}

Eigen::VectorXd lowpass_zero_phase(const Eigen::VectorXd& x, double cutoff_hz, int sample_rate_hz) {
  if (!(cutoff_hz > 0) || cutoff_hz >= sample_rate_hz / 2.0) {
    throw Error("lowpass: cutoff must lie in (0, Nyquist)");
  }
  // Butterworth 4th order = two biquads with Q = 1/(2 cos(pi/8)), 1/(2 cos(3pi/8)).
  const Biquad s1 = butterworth_lowpass_section(cutoff_hz, sample_rate_hz, 0.54119610);
  const Biquad s2 = butterworth_lowpass_section(cutoff_hz, sample_rate_hz, 1.30656296);
  Eigen::VectorXd y = x;
  s1.run(y);
  s2.run(y);
  y.reverseInPlace();
  s1.run(y);
  s2.run(y);
  y.reverseInPlace();
  return y;
}

Eigen::VectorXd preemphasis(const Eigen::VectorXd& x, double coeff) {
  Eigen::VectorXd y(x.size());
  for (Eigen::Index n = 0; n < x.size(); ++n) y(n) = x(n) - (n > 0 ? coeff * x(n - 1) : 0.0);
  return y;
}

Eigen::VectorXd lpc_residual(const Eigen::VectorXd& x, int sample_rate_hz, int order,
                             double frame_ms, double hop_ms) {
  const Eigen::Index frame = std::max<Eigen::Index>(order + 1, samples_for_ms(frame_ms, sample_rate_hz));
  const Eigen::Index hop = std::max<Eigen::Index>(1, samples_for_ms(hop_ms, sample_rate_hz));
  const Eigen::VectorXd w = make_window(Window::Hann, frame);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index block = 0; block < x.size(); block += hop) {
    const Eigen::Index block_len = std::min(hop, x.size() - block);
    const Eigen::Index center = block + block_len / 2;
    Eigen::Index start = std::clamp<Eigen::Index>(center - frame / 2, 0,
                                                  std::max<Eigen::Index>(0, x.size() - frame));
    const Eigen::Index len = std::min(frame, x.size() - start);
    if (len <= order) continue;
    Eigen::VectorXd seg = x.segment(start, len);
    if (len == frame) seg = seg.cwiseProduct(w);
    Eigen::VectorXd r = autocorrelation(seg, order);
    if (!(r(0) > 0.0)) continue;
    r(0) *= 1.0 + 1e-9;  // white-noise correction keeps the recursion stable
    const LpcModel model = levinson_durbin(r, order);
    // The first `order` samples lack a full history and are left at zero.
    for (Eigen::Index n = std::max<Eigen::Index>(block, order); n < block + block_len; ++n) {
      double acc = x(n);
      for (int k = 1; k <= order; ++k) acc -= model.coefficients(k - 1) * x(n - k);
      e(n) = acc;
    }
  }
  return e;
}

Eigen::VectorXd moving_average(const Eigen::VectorXd& x, Eigen::Index width) {
  const Eigen::Index half = std::max<Eigen::Index>(0, width / 2);
  Eigen::VectorXd prefix(x.size() + 1);
  prefix(0) = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) prefix(i + 1) = prefix(i) + x(i);
  Eigen::VectorXd y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index hi = std::min<Eigen::Index>(x.size(), i + half + 1);
    y(i) = (prefix(hi) - prefix(lo)) / static_cast<double>(hi - lo);
  }
  return y;
}

}  // namespace dys
