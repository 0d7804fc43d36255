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

#include "dys/glottal.hpp"
#include "fixtures.hpp"

using namespace dys;
using dys::testing::matched_fraction;
using dys::testing::steady_voice;

namespace {

GciSequence hand_sequence() {
  GciSequence g;
  g.sample_rate_hz = 8000;
  g.instants = {0, 80, 164, 244, 324};
  g.pulse_amplitudes = {1.0, 1.1, 0.9, 1.0, 1.0};
  return g;
}

AudioClip silence(double seconds, int rate) {
  AudioClip c;
  c.sample_rate_hz = rate;
  c.samples = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(seconds * rate));
  return c;
}

}  // namespace

TEST_CASE("glottal measures of a hand-built instant sequence") {
  const GlottalParams p = extract_glottal_params(hand_sequence(), silence(1.0, 8000));
  // Periods 10, 10.5, 10, 10 ms; absolute differences 0.5, 0.5, 0.
  CHECK(p.mean_period_ms == doctest::Approx(10.125));
  CHECK(p.period_std_ms == doctest::Approx(0.2165063509));
  CHECK(p.jitter_local_pct == doctest::Approx(100.0 * (1.0 / 3.0) / 10.125));
  // Amplitude differences 0.1, 0.2, 0.1, 0 over a mean of 1.0.
  CHECK(p.shimmer_local_pct == doctest::Approx(10.0));
  CHECK(p.mean_pulse_amplitude == doctest::Approx(1.0));
  CHECK(p.pulse_amplitude_std == doctest::Approx(std::sqrt(0.004)));
  // Instants fall in the first five of 99 frames.
  CHECK(p.voiced_fraction == doctest::Approx(5.0 / 99.0));
}

TEST_CASE("implausible gaps are excluded from period statistics") {
  GciSequence g = hand_sequence();
  g.instants.push_back(524);  // 25 ms gap, rejected
  g.instants.push_back(604);  // 10 ms, accepted but has no accepted neighbour period
  g.pulse_amplitudes.push_back(1.0);
  g.pulse_amplitudes.push_back(1.0);
  const GlottalParams p = extract_glottal_params(g, silence(1.0, 8000));
  CHECK(p.mean_period_ms == doctest::Approx(10.1));
  CHECK(p.jitter_local_pct == doctest::Approx(100.0 * (1.0 / 3.0) / 10.1));
}

TEST_CASE("empty sequences give all-zero measures") {
  const GlottalParams p = extract_glottal_params(GciSequence{}, silence(1.0, 8000));
  for (double v : p.values()) CHECK(v == 0.0);
  CHECK(GlottalParams::kNames.size() == 7);
}

TEST_CASE("inverse-filter order") {
  CHECK(residual_lpc_order(8000) == 10);
  CHECK(residual_lpc_order(16000) == 18);
}

TEST_CASE("mean-based signal is a normalized local mean") {
  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(300, 2.5);
  CHECK((mean_based_signal(flat, 41).array() - 2.5).abs().maxCoeff() < 1e-12);
  // A tone outside the window's main lobe (8 periods long) averages out.
  const AudioClip tone = dys::testing::sine_clip(100.0, 0.5, 8000);
  const Eigen::VectorXd m = mean_based_signal(tone.samples, 641);
  CHECK(m.segment(400, 3200).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("closure instants of jitter-free voices") {
  for (int rate : {8000, 16000}) {
    for (double f0 : {90.0, 100.0, 120.0, 180.0}) {
      const auto u = synthesize_utterance(steady_voice(f0, rate), 1);
      const GciSequence g = detect_gci(u.clip);
      const auto tol = static_cast<Eigen::Index>(0.25e-3 * rate);
      CAPTURE(rate);
      CAPTURE(f0);
      CHECK(matched_fraction(u.impulse_positions, g.instants, tol) >= 0.95);
      CHECK(g.mean_pitch_hz == doctest::Approx(f0).epsilon(0.03));
      // Few spurious detections.
      CHECK(g.size() <= u.impulse_positions.size() + 2);
      for (std::size_t k = 1; k < g.size(); ++k) CHECK(g.instants[k] - g.instants[k - 1] >= 0.0025 * rate);
      for (double a : g.pulse_amplitudes) CHECK(a > 0.0);
    }
  }
}

TEST_CASE("detection does not depend on gain or polarity") {
  const auto u = synthesize_utterance(steady_voice(120.0), 3);
  const GciSequence base = detect_gci(u.clip);
  AudioClip scaled = u.clip;
  scaled.samples *= 0.05;
  CHECK(detect_gci(scaled).instants == base.instants);
  AudioClip flipped = u.clip;
  flipped.samples *= -1.0;
  const auto tol = 2;
  CHECK(matched_fraction(u.impulse_positions, detect_gci(flipped).instants, tol) >= 0.95);
}

TEST_CASE("injected jitter is recovered") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SynthesisProfile p = steady_voice(120.0);
    p.jitter_pct = 2.0;
    const auto u = synthesize_utterance(p, seed);
    const GlottalParams g = extract_glottal_params(detect_gci(u.clip), u.clip);
    CAPTURE(seed);
    CHECK(g.jitter_local_pct >= 1.2);
    CHECK(g.jitter_local_pct <= 3.0);
  }
}

TEST_CASE("measured jitter and shimmer grow with the injected amounts") {
  auto measure = [](double jitter, double shimmer) {
    SynthesisProfile p = steady_voice(120.0);
    p.jitter_pct = jitter;
    p.shimmer_pct = shimmer;
    const auto u = synthesize_utterance(p, 7);
    return extract_glottal_params(detect_gci(u.clip), u.clip);
  };
  const GlottalParams clean = measure(0.0, 0.0);
  const GlottalParams mid = measure(1.0, 4.0);
  const GlottalParams rough = measure(3.0, 10.0);
  CHECK(clean.jitter_local_pct < 0.5);
  CHECK(clean.jitter_local_pct < mid.jitter_local_pct);
  CHECK(mid.jitter_local_pct < rough.jitter_local_pct);
  CHECK(clean.shimmer_local_pct < mid.shimmer_local_pct);
  CHECK(mid.shimmer_local_pct < rough.shimmer_local_pct);
  CHECK(clean.voiced_fraction > 0.9);
  CHECK(clean.mean_period_ms == doctest::Approx(1000.0 / 120.0).epsilon(0.01));
}

TEST_CASE("unvoiced input yields no instants") {
  CHECK(detect_gci(dys::testing::noise_clip(1.0, 8000, 21)).empty());
  CHECK(detect_gci(silence(1.0, 8000)).empty());
  const auto u = synthesize_utterance(steady_voice(120.0), 1);
  AudioClip tiny = u.clip;
  tiny.samples = tiny.samples.head(400).eval();  // 50 ms
  CHECK(detect_gci(tiny).empty());
}
