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

#ifndef DYS_DSP_HPP
#define DYS_DSP_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dys/corpus.hpp"

namespace dys {

enum class Window { Hann, Hamming, Blackman, Rectangular };

/// Symmetric window of length n.
Eigen::VectorXd make_window(Window window, Eigen::Index n);

/// round(ms * fs / 1000)
Eigen::Index samples_for_ms(double ms, int sample_rate_hz);

/// floor((n - frame_len) / hop_len) + 1 for n >= frame_len, else 0.
Eigen::Index frame_count(Eigen::Index n, Eigen::Index frame_len, Eigen::Index hop_len);

struct FrameSequence {
  Eigen::MatrixXd frames;  ///< n_frames x frame_len, row-per-frame
  double frame_ms = 0.0;
  double hop_ms = 0.0;
  int sample_rate_hz = 0;
  Eigen::Index frame_len = 0;
  Eigen::Index hop_len = 0;

  Eigen::Index size() const { return frames.rows(); }
};

/// Non-padded framing; the last partial frame is dropped.
FrameSequence frame_signal(const AudioClip& clip, double frame_ms, double hop_ms);

// ---------------------------------------------------------------------------
// FFT

inline bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

/// Iterative radix-2 FFT. The inverse is scaled by 1/n.
template <typename Scalar>
void fft_inplace(std::vector<std::complex<Scalar>>& a, bool inverse = false) {
  const std::size_t n = a.size();
  if (!is_power_of_two(static_cast<Eigen::Index>(n))) {
    throw Error("fft length " + std::to_string(n) + " is not a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const Scalar sign = inverse ? Scalar(1) : Scalar(-1);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    std::vector<std::complex<Scalar>> twiddle(half);
    for (std::size_t k = 0; k < half; ++k) {
      twiddle[k] = std::polar(Scalar(1), sign * Scalar(2) * std::numbers::pi_v<Scalar> *
                                             static_cast<Scalar>(k) / static_cast<Scalar>(len));
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<Scalar> u = a[i + k];
        const std::complex<Scalar> v = a[i + k + half] * twiddle[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<Scalar>(n);
  }
}

/// DFT of a real sequence zero-padded to n_fft; returns bins 0..n_fft/2.
template <typename Derived>
Eigen::Matrix<std::complex<typename Derived::Scalar>, Eigen::Dynamic, 1> rfft(
    const Eigen::MatrixBase<Derived>& x, Eigen::Index n_fft) {
  using Scalar = typename Derived::Scalar;
  if (x.size() > n_fft) throw Error("rfft: input longer than n_fft");
  std::vector<std::complex<Scalar>> buf(static_cast<std::size_t>(n_fft));
  for (Eigen::Index i = 0; i < x.size(); ++i) buf[static_cast<std::size_t>(i)] = x(i);
  fft_inplace(buf);
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> out(n_fft / 2 + 1);
  for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = buf[static_cast<std::size_t>(k)];
  return out;
}

/// Inverse of rfft for a Hermitian spectrum given by its n_fft/2+1 bins.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar::value_type, Eigen::Dynamic, 1> irfft(
    const Eigen::MatrixBase<Derived>& half, Eigen::Index n_fft) {
  using Scalar = typename Derived::Scalar::value_type;
  if (half.size() != n_fft / 2 + 1) throw Error("irfft: expected n_fft/2+1 bins");
  std::vector<std::complex<Scalar>> buf(static_cast<std::size_t>(n_fft));
  for (Eigen::Index k = 0; k < half.size(); ++k) buf[static_cast<std::size_t>(k)] = half(k);
  for (Eigen::Index k = 1; k < n_fft / 2; ++k) {
    buf[static_cast<std::size_t>(n_fft - k)] = std::conj(half(k));
  }
  fft_inplace(buf, true);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n_fft);
  for (Eigen::Index i = 0; i < n_fft; ++i) out(i) = buf[static_cast<std::size_t>(i)].real();
  return out;
}

struct Spectrogram {
  Eigen::MatrixXd magnitudes;  ///< n_frames x (n_fft/2 + 1), linear
  Eigen::MatrixXd phases;      ///< principal values in (-pi, pi]
  Eigen::Index n_fft = 0;
  int sample_rate_hz = 0;

  double bin_hz() const { return static_cast<double>(sample_rate_hz) / static_cast<double>(n_fft); }
};

Spectrogram stft(const AudioClip& clip, double frame_ms, double hop_ms, Eigen::Index n_fft,
                 Window window = Window::Hamming);

/// Keeps the span between the first and last voiced 10 ms frame. A frame is
/// voiced when its RMS exceeds peak-frame RMS + threshold_db and it belongs
/// to a run of such frames lasting at least min_voiced_ms.
AudioClip trim_silence(const AudioClip& clip, double threshold_db = -40.0,
                       double min_voiced_ms = 30.0);

// ---------------------------------------------------------------------------
// Linear prediction

/// Predictor convention: x[n] ~ sum_k coefficients[k-1] * x[n-k].
template <typename Scalar>
struct BasicLpcModel {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  int order = 0;
  Vector coefficients;
  Vector reflection_coefficients;
  Scalar gain = 0;  ///< sqrt of the final prediction error (per-sample power)

  Scalar residual_energy() const { return gain * gain; }
  bool stable() const {
    return (reflection_coefficients.array().abs() < Scalar(1)).all();
  }
};

using LpcModel = BasicLpcModel<double>;

/// Biased autocorrelation r[k] = (1/N) sum x[n] x[n+k], k = 0..max_lag.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> autocorrelation(
    const Eigen::MatrixBase<Derived>& x, Eigen::Index max_lag) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(max_lag + 1);
  for (Eigen::Index k = 0; k <= max_lag && k < n; ++k) {
    r(k) = x.head(n - k).dot(x.tail(n - k)) / static_cast<Scalar>(n);
  }
  return r;
}

/// Levinson-Durbin recursion on r[0..order].
template <typename Scalar>
BasicLpcModel<Scalar> levinson_durbin(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& r, int order) {
  if (order < 0) throw Error("lpc order must be non-negative");
  if (r.size() < order + 1) throw Error("levinson_durbin: not enough autocorrelation lags");
  if (!(r(0) > Scalar(0))) throw Error("lpc: singular autocorrelation (all-zero frame)");
  BasicLpcModel<Scalar> m;
  m.order = order;
  m.coefficients = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(order);
  m.reflection_coefficients = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(order);
  Scalar err = r(0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> prev;
  for (int i = 1; i <= order; ++i) {
    if (!(err > Scalar(0))) break;  // perfectly predictable; leave the rest at zero
    Scalar acc = r(i);
    for (int j = 1; j < i; ++j) acc -= m.coefficients(j - 1) * r(i - j);
    const Scalar k = acc / err;
    prev = m.coefficients.head(i - 1);
    m.coefficients(i - 1) = k;
    for (int j = 1; j < i; ++j) m.coefficients(j - 1) = prev(j - 1) - k * prev(i - j - 1);
    m.reflection_coefficients(i - 1) = k;
    err *= (Scalar(1) - k * k);
  }
  m.gain = std::sqrt(std::max(err, Scalar(0)));
  return m;
}

/// Autocorrelation-method LPC of one (already windowed) frame.
template <typename Derived>
BasicLpcModel<typename Derived::Scalar> lpc(const Eigen::MatrixBase<Derived>& frame, int order) {
  if (order < 0) throw Error("lpc order must be non-negative");
  if (order >= frame.size()) throw Error("lpc order must be smaller than the frame length");
  auto r = autocorrelation(frame, order);
  return levinson_durbin(r, order);
}

/// Inverse filter e[n] = x[n] - sum a_k x[n-k] with zero history.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> inverse_filter(
    const Eigen::MatrixBase<Derived>& x, const BasicLpcModel<typename Derived::Scalar>& model) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e(x.size());
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    Scalar acc = x(n);
    for (int k = 1; k <= model.order && k <= n; ++k) acc -= model.coefficients(k - 1) * x(n - k);
    e(n) = acc;
  }
  return e;
}

// ---------------------------------------------------------------------------
// DCT

/// Orthonormal DCT-II, first n_out coefficients.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> dct_ii(
    const Eigen::MatrixBase<Derived>& values, Eigen::Index n_out) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = values.size();
  if (n == 0) throw Error("dct_ii: empty input");
  if (n_out > n || n_out < 0) throw Error("dct_ii: n_out exceeds input length");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n_out);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar s0 = std::sqrt(Scalar(1) / static_cast<Scalar>(n));
  const Scalar sk = std::sqrt(Scalar(2) / static_cast<Scalar>(n));
  for (Eigen::Index k = 0; k < n_out; ++k) {
    Scalar acc = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += values(i) * std::cos(pi * static_cast<Scalar>((2 * i + 1) * k) /
                                  static_cast<Scalar>(2 * n));
    }
    out(k) = (k == 0 ? s0 : sk) * acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pitch

struct PitchOptions {
  double f_min_hz = 60.0;
  double f_max_hz = 400.0;
  double hop_ms = 10.0;
  double lowpass_hz = 600.0;        ///< periodicity is measured below this
  double voicing_threshold = 0.65;  ///< normalized correlation of the low band
  double raw_threshold = 0.1;       ///< normalized correlation of the full band
  double silence_db = -35.0;        ///< frames quieter than peak + this are unvoiced
};

struct PitchTrack {
  std::vector<double> f0_hz;        ///< 0 for unvoiced frames
  std::vector<double> correlation;  ///< best normalized correlation per frame
  Eigen::Index frame_len = 0;
  Eigen::Index hop_len = 0;
  int sample_rate_hz = 0;

  /// Index of the frame whose center is nearest to `sample`.
  std::size_t frame_at(Eigen::Index sample) const;
  bool voiced_at(Eigen::Index sample) const;
  std::size_t voiced_count() const;
};

PitchTrack track_pitch(const AudioClip& clip, const PitchOptions& options = {});

/// Median pitch over voiced frames, or nullopt when nothing is voiced.
std::optional<double> estimate_mean_pitch(const AudioClip& clip, double f_min = 60.0,
                                          double f_max = 400.0);

// ---------------------------------------------------------------------------
// Filtering and rate conversion

/// Band-limited (Kaiser-windowed sinc) resampling;
/// output length = round(N * target / source).
AudioClip resample(const AudioClip& clip, int target_rate_hz);

/// 4th-order Butterworth low-pass run forward and backward (zero phase).
Eigen::VectorXd lowpass_zero_phase(const Eigen::VectorXd& x, double cutoff_hz, int sample_rate_hz);

/// y[n] = x[n] - coeff * x[n-1]
Eigen::VectorXd preemphasis(const Eigen::VectorXd& x, double coeff);

/// Frame-wise LPC inverse filtering of a whole signal. Each block of hop
/// samples is filtered with the model of the frame centered on it.
Eigen::VectorXd lpc_residual(const Eigen::VectorXd& x, int sample_rate_hz, int order,
                             double frame_ms = 25.0, double hop_ms = 5.0);

/// Centered moving average with an odd window (edges use the available part).
Eigen::VectorXd moving_average(const Eigen::VectorXd& x, Eigen::Index width);

}  // namespace dys

#endif  // DYS_DSP_HPP
