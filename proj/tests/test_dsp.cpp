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

#include <doctest.h>

#include <complex>
#include <random>

#include "dys/dsp.hpp"
#include "fixtures.hpp"

using namespace dys;
using dys::testing::noise_clip;
using dys::testing::sine_clip;

namespace {

Eigen::VectorXcd naive_dft(const Eigen::VectorXd& x, Eigen::Index n_fft) {
  Eigen::VectorXcd out(n_fft / 2 + 1);
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index n = 0; n < x.size(); ++n) {
      acc += x(n) * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k * n) / static_cast<double>(n_fft));
    }
    out(k) = acc;
  }
  return out;
}

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

// Dominant frequency by parabolic peak interpolation on a long DFT.
double dominant_hz(const AudioClip& c) {
  const Eigen::Index n_fft = 1 << 16;
  const Eigen::VectorXd w = make_window(Window::Hann, c.size());
  const auto spec = rfft(Eigen::VectorXd(c.samples.cwiseProduct(w)), n_fft);
  Eigen::Index k = 0;
  spec.cwiseAbs().maxCoeff(&k);
  return static_cast<double>(k) * c.sample_rate_hz / static_cast<double>(n_fft);
}

}  // namespace

TEST_CASE("frame arithmetic") {
  CHECK(frame_count(100, 20, 10) == 9);
  CHECK(frame_count(19, 20, 10) == 0);
  CHECK(frame_count(20, 20, 10) == 1);
  CHECK_THROWS_AS(frame_count(100, 0, 10), Error);
  CHECK(samples_for_ms(25.0, 16000) == 400);
  CHECK(samples_for_ms(20.0, 8000) == 160);

  const AudioClip c = sine_clip(100.0, 1.0, 8000);
  const FrameSequence f = frame_signal(c, 20.0, 10.0);
  CHECK(f.size() == 99);
  CHECK(f.frame_len == 160);
  CHECK(f.frames.row(3).transpose() == c.samples.segment(240, 160));
}

TEST_CASE("windows follow their closed forms") {
  const Eigen::VectorXd hamming = make_window(Window::Hamming, 11);
  CHECK(hamming(0) == doctest::Approx(0.08));
  CHECK(hamming(5) == doctest::Approx(1.0));
  CHECK(hamming(2) == doctest::Approx(0.54 - 0.46 * std::cos(2.0 * M_PI * 2.0 / 10.0)));
  const Eigen::VectorXd blackman = make_window(Window::Blackman, 9);
  CHECK(std::abs(blackman(0)) < 1e-12);
  CHECK(blackman(4) == doctest::Approx(1.0));
  for (Window w : {Window::Hann, Window::Hamming, Window::Blackman}) {
    const Eigen::VectorXd v = make_window(w, 64);
    CHECK((v - v.reverse()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("FFT agrees with the direct DFT and inverts") {
  for (Eigen::Index n_fft : {8, 64, 256}) {
    const Eigen::VectorXd x = random_vector(n_fft - 3, static_cast<unsigned>(n_fft));
    const Eigen::VectorXcd fast = rfft(x, n_fft);
    CHECK((fast - naive_dft(x, n_fft)).cwiseAbs().maxCoeff() < 1e-9);
    const Eigen::VectorXd back = irfft(fast, n_fft);
    CHECK((back.head(x.size()) - x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(back.tail(3).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(rfft(Eigen::VectorXd::Ones(10), 8), Error);
}

TEST_CASE("Levinson-Durbin solves the Toeplitz normal equations") {
  const Eigen::VectorXd x = random_vector(400, 5);
  for (int order : {1, 4, 12}) {
    const Eigen::VectorXd r = autocorrelation(x, order);
    const LpcModel m = levinson_durbin(r, order);
    Eigen::MatrixXd toeplitz(order, order);
    for (int i = 0; i < order; ++i) {
      for (int j = 0; j < order; ++j) toeplitz(i, j) = r(std::abs(i - j));
    }
    const Eigen::VectorXd direct = toeplitz.ldlt().solve(r.segment(1, order));
    CHECK((m.coefficients - direct).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(m.stable());
    // Prediction error power: r0 - a . r[1..p]
    CHECK(m.residual_energy() == doctest::Approx(r(0) - direct.dot(r.segment(1, order))));
  }
  CHECK_THROWS_AS(levinson_durbin(Eigen::VectorXd(Eigen::VectorXd::Zero(3)), 2), Error);
  CHECK_THROWS_AS(lpc(Eigen::VectorXd::Ones(4), 4), Error);
}

TEST_CASE("LPC recovers a known AR(2) process") {
  // x[n] = 1.3 x[n-1] - 0.6 x[n-2] + e[n]
  const Eigen::VectorXd e = random_vector(200000, 17);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(e.size());
  for (Eigen::Index n = 2; n < x.size(); ++n) x(n) = 1.3 * x(n - 1) - 0.6 * x(n - 2) + e(n);
  const LpcModel m = lpc(x, 2);
  CHECK(m.coefficients(0) == doctest::Approx(1.3).epsilon(0.01));
  CHECK(m.coefficients(1) == doctest::Approx(-0.6).epsilon(0.01));
}

TEST_CASE("inverse filtering whitens the AR process") {
  const Eigen::VectorXd e = random_vector(16000, 3);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(e.size());
  for (Eigen::Index n = 2; n < x.size(); ++n) x(n) = 1.3 * x(n - 1) - 0.6 * x(n - 2) + e(n);
  const Eigen::VectorXd res = lpc_residual(x, 8000, 2);
  CHECK(res.head(2).isZero());
  const Eigen::VectorXd r = res.tail(15000);
  // Residual power matches the innovation; lag-1 correlation is near zero
  // (the AR input has lag-1 correlation 0.81).
  CHECK(r.squaredNorm() / e.tail(15000).squaredNorm() == doctest::Approx(1.0).epsilon(0.05));
  const double rho1 = r.head(14999).dot(r.tail(14999)) / r.squaredNorm();
  CHECK(std::abs(rho1) < 0.05);
}

TEST_CASE("orthonormal DCT-II") {
  const Eigen::Index n = 12;
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) d.col(i) = dct_ii(Eigen::VectorXd(Eigen::VectorXd::Unit(n, i)), n);
  CHECK((d * d.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd c = dct_ii(ones, 4);
  CHECK(c(0) == doctest::Approx(std::sqrt(12.0)));
  CHECK(c.tail(3).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(dct_ii(ones, 13), Error);
}

TEST_CASE("pitch tracker on tones and noise") {
  for (double f0 : {90.0, 150.0, 300.0}) {
    const auto f = estimate_mean_pitch(sine_clip(f0, 1.0, 8000));
    REQUIRE(f.has_value());
    CHECK(*f == doctest::Approx(f0).epsilon(0.01));
  }
  const PitchTrack noise = track_pitch(noise_clip(1.0, 8000, 4));
  CHECK(noise.voiced_count() <= noise.f0_hz.size() / 20);
  AudioClip silent;
  silent.sample_rate_hz = 8000;
  silent.samples = Eigen::VectorXd::Zero(8000);
  CHECK_FALSE(estimate_mean_pitch(silent).has_value());
}

TEST_CASE("pitch tracker avoids subharmonics of a synthetic voice") {
  for (double f0 : {60.0, 100.0, 220.0}) {
    const auto u = synthesize_utterance(dys::testing::steady_voice(f0, 16000), 2);
    const auto f = estimate_mean_pitch(u.clip);
    REQUIRE(f.has_value());
    CHECK(*f == doctest::Approx(f0).epsilon(0.02));
  }
}

TEST_CASE("resampling keeps tones and follows the length rule") {
  const AudioClip c = sine_clip(440.0, 0.5, 16000);
  const AudioClip down = resample(c, 10000);
  CHECK(down.size() == 5000);
  CHECK(down.sample_rate_hz == 10000);
  CHECK(dominant_hz(down) == doctest::Approx(440.0).epsilon(0.002));
  const double rms_in = c.samples.segment(800, 6400).norm() / std::sqrt(6400.0);
  const double rms_out = down.samples.segment(500, 4000).norm() / std::sqrt(4000.0);
  CHECK(rms_out == doctest::Approx(rms_in).epsilon(0.01));

  // A tone above the new Nyquist is removed.
  const AudioClip alias = resample(sine_clip(4500.0, 0.5, 16000), 8000);
  CHECK(alias.samples.segment(400, 3200).cwiseAbs().maxCoeff() < 0.01);
  CHECK(resample(c, 16000).samples == c.samples);
  CHECK_THROWS_AS(resample(c, 0), Error);
}

TEST_CASE("zero-phase low-pass") {
  const AudioClip low = sine_clip(200.0, 1.0, 8000);
  const AudioClip high = sine_clip(3000.0, 1.0, 8000);
  const Eigen::VectorXd y = lowpass_zero_phase(low.samples + high.samples, 600.0, 8000);
  // Passband tone survives without delay; stopband tone is gone.
  CHECK((y - low.samples).segment(500, 7000).cwiseAbs().maxCoeff() < 0.02);
  CHECK_THROWS_AS(lowpass_zero_phase(y, 4000.0, 8000), Error);
}

TEST_CASE("pre-emphasis and moving average") {
  Eigen::VectorXd x(4);
  x << 1.0, 2.0, 3.0, 4.0;
  Eigen::VectorXd expect(4);
  expect << 1.0, 2.0 - 0.97, 3.0 - 1.94, 4.0 - 2.91;
  CHECK((preemphasis(x, 0.97) - expect).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(50, 3.0);
  CHECK((moving_average(flat, 7).array() - 3.0).abs().maxCoeff() < 1e-12);
  const Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(50, 0.0, 49.0);
  CHECK((moving_average(ramp, 5).segment(2, 46) - ramp.segment(2, 46)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("silence trimming keeps the voiced span") {
  AudioClip c;
  c.sample_rate_hz = 8000;
  c.samples = Eigen::VectorXd::Zero(8000 * 2);
  c.samples.segment(4000, 8000) = sine_clip(200.0, 1.0, 8000).samples;
  const AudioClip t = trim_silence(c);
  CHECK(t.size() == doctest::Approx(8000).epsilon(0.03));
  // A short click is ignored when a longer voiced run exists.
  c.samples(500) = 0.9;
  CHECK(trim_silence(c).size() == t.size());
  AudioClip silent = c;
  silent.samples.setZero();
  CHECK_THROWS_AS(trim_silence(silent), Error);
}

TEST_CASE("STFT shape and tone bin") {
  const Spectrogram s = stft(sine_clip(1000.0, 1.0, 8000), 20.0, 10.0, 256);
  CHECK(s.magnitudes.rows() == 99);
  CHECK(s.magnitudes.cols() == 129);
  Eigen::Index k = 0;
  s.magnitudes.row(10).maxCoeff(&k);
  CHECK(k == 32);
  CHECK(s.phases.cwiseAbs().maxCoeff() <= M_PI);
}
