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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "dys/corpus.hpp"

namespace dys {
namespace {

constexpr double kPi = std::numbers::pi;

// Two-pole resonator with unity DC gain.
struct Resonator {
  double g = 1.0, a1 = 0.0, a2 = 0.0;
  double y1 = 0.0, y2 = 0.0;

  void tune(double freq_hz, double bandwidth_hz, int fs) {
    const double r = std::exp(-kPi * bandwidth_hz / fs);
    const double c = 2.0 * r * std::cos(2.0 * kPi * freq_hz / fs);
    a1 = c;
    a2 = -r * r;
    g = 1.0 - c + r * r;
  }
  double step(double x) {
    const double y = g * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

// Syllable-train gain in [0, 1] at time t (seconds); 0 outside voicing.
double syllable_gain(const SyllableTrain& s, double t) {
  const double cycle = 1.0 / s.rate_hz;
  const double phase = std::fmod(t, cycle);
  const double start = s.burst_ms / 1000.0 + 0.005;
  const double len = s.voiced_duty * cycle;
  constexpr double kRamp = 0.010;
  if (phase < start || phase > start + len) return 0.0;
  const double into = phase - start;
  const double left = start + len - phase;
  double g = 1.0;
  if (into < kRamp) g = 0.5 - 0.5 * std::cos(kPi * into / kRamp);
  if (left < kRamp) g = std::min(g, 0.5 - 0.5 * std::cos(kPi * left / kRamp));
  return g;
}

}  // namespace

void SynthesisProfile::validate() const {
  if (sample_rate_hz <= 0) throw Error("synthesis: sample rate must be positive");
  if (!(f0_hz >= 60.0 && f0_hz <= 400.0)) {
    throw Error("synthesis: f0 " + std::to_string(f0_hz) + " Hz outside [60, 400]");
  }
  if (!(jitter_pct >= 0.0) || !(shimmer_pct >= 0.0) || !(formant_instability_pct >= 0.0)) {
    throw Error("synthesis: jitter, shimmer and instability must be non-negative");
  }
  if (!(duration_s > 0.0)) throw Error("synthesis: duration must be positive");
  if (!(source_tilt_hz >= 0.0)) throw Error("synthesis: source tilt must be non-negative");
  const double nyquist = sample_rate_hz / 2.0;
  for (std::size_t i = 0; i < formants_hz.size(); ++i) {
    if (!(formants_hz[i] > 0.0) || formants_hz[i] >= nyquist) {
      throw Error("synthesis: formant F" + std::to_string(i + 1) + " = " +
                  std::to_string(formants_hz[i]) + " Hz is not below Nyquist " +
                  std::to_string(nyquist));
    }
    if (i > 0 && !(formants_hz[i] > formants_hz[i - 1])) {
      throw Error("synthesis: formants must be strictly ascending");
    }
    if (!(formant_bandwidths_hz[i] > 0.0)) throw Error("synthesis: bandwidths must be positive");
  }
  if (syllables && (!(syllables->rate_hz > 0.0) || !(syllables->voiced_duty > 0.0))) {
    throw Error("synthesis: syllable rate and duty must be positive");
  }
}

SynthesizedUtterance synthesize_utterance(const SynthesisProfile& p, std::uint64_t seed) {
  p.validate();
  const int fs = p.sample_rate_hz;
  const auto n = static_cast<Eigen::Index>(std::llround(p.duration_s * fs));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Local jitter = E|T_i - T_{i-1}| / T = 2 sd / sqrt(pi) for iid periods.
  const double period_sd = p.jitter_pct / 100.0 * std::sqrt(kPi) / 2.0;
  const double amp_sd = p.shimmer_pct / 100.0 * std::sqrt(kPi) / 2.0;
  const double base_period = std::round(fs / p.f0_hz);

  SynthesizedUtterance out;
  Eigen::VectorXd excitation = Eigen::VectorXd::Zero(n);
  struct Pulse {
    Eigen::Index pos;
    std::array<double, 5> formants;
  };
  std::vector<Pulse> pulses;
  double t = 0.0;
  while (true) {
    const auto pos = static_cast<Eigen::Index>(std::llround(t));
    if (pos >= n) break;
    const double amp = std::max(0.05, 1.0 + amp_sd * normal(rng));
    std::array<double, 5> formants = p.formants_hz;
    for (double& f : formants) {
      f *= 1.0 + p.formant_instability_pct / 100.0 * normal(rng);
      f = std::clamp(f, 50.0, 0.95 * fs / 2.0);
    }
    const double gate = p.syllables ? syllable_gain(*p.syllables, static_cast<double>(pos) / fs) : 1.0;
    if (gate > 0.0) {
      excitation(pos) = amp * gate;
      out.impulse_positions.push_back(pos);
      out.impulse_amplitudes.push_back(amp * gate);
      pulses.push_back({pos, formants});
    }
    const double period = base_period * (1.0 + period_sd * normal(rng));
    t += std::max(period, 0.25 * base_period);
  }

  std::array<Resonator, 5> tract;
  for (std::size_t j = 0; j < tract.size(); ++j) {
    tract[j].tune(p.formants_hz[j], p.formant_bandwidths_hz[j], fs);
  }
  const double tilt = p.source_tilt_hz > 0.0 ? std::exp(-2.0 * kPi * p.source_tilt_hz / fs) : 0.0;
  double source = 0.0;
  Eigen::VectorXd y(n);
  std::size_t next_pulse = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (next_pulse < pulses.size() && pulses[next_pulse].pos == i) {
      for (std::size_t j = 0; j < tract.size(); ++j) {
        tract[j].tune(pulses[next_pulse].formants[j], p.formant_bandwidths_hz[j], fs);
      }
      ++next_pulse;
    }
    source = excitation(i) + tilt * source;
    double v = (1.0 - tilt) * source;
    for (auto& r : tract) v = r.step(v);
    y(i) = v;
  }

  if (p.syllables) {
    // Consonant release: a short band-pass noise burst at each syllable onset.
    const double cycle = 1.0 / p.syllables->rate_hz;
    const auto burst_len = static_cast<Eigen::Index>(p.syllables->burst_ms / 1000.0 * fs);
    const double level = 0.3 * std::max(1e-12, y.cwiseAbs().maxCoeff());
    for (double onset = 0.0; onset < p.duration_s; onset += cycle) {
      Resonator shape;
      shape.tune(std::min(p.syllables->burst_center_hz, 0.45 * fs), 1000.0, fs);
      shape.g = 1.0;
      const auto start = static_cast<Eigen::Index>(onset * fs);
      double energy = 0.0;
      Eigen::VectorXd burst(burst_len);
      for (Eigen::Index k = 0; k < burst_len; ++k) {
        burst(k) = shape.step(normal(rng));
        energy += burst(k) * burst(k);
      }
      if (energy <= 0.0 || burst_len == 0) continue;
      burst *= level / std::sqrt(energy / static_cast<double>(burst_len)) / 3.0;
      for (Eigen::Index k = 0; k < burst_len && start + k < n; ++k) {
        const double ramp = std::sin(kPi * (static_cast<double>(k) + 0.5) / static_cast<double>(burst_len));
        y(start + k) += burst(k) * ramp;
      }
    }
  }

  if (p.noise_floor > 0.0) {
    const double peak = std::max(1e-12, y.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i) y(i) += p.noise_floor * peak * normal(rng);
  }
  if (p.normalize) {
    const double peak = y.cwiseAbs().maxCoeff();
    if (peak > 0.0) y *= 0.9 / peak;
  }
  out.clip.sample_rate_hz = fs;
  out.clip.samples = std::move(y);
  return out;
}

SeverityTraits severity_traits(int label) {
  switch (label) {
    case 1: return {4.0, 10.0, 4.5, 4.0, 1.0};
    case 2: return {2.5, 7.0, 3.0, 4.5, 1.0};
    case 3: return {1.5, 4.0, 2.0, 5.0, 1.3};
    case 4: return {0.8, 2.0, 1.0, 5.5, 1.3};
    case 5: return {0.3, 1.0, 0.5, 6.0, 1.0};
    default: throw Error("severity label " + std::to_string(label) + " outside 1..5");
  }
}

std::array<double, 5> vowel_formants(UtteranceKind kind) {
  switch (kind) {
    case UtteranceKind::A:
    case UtteranceKind::KA:
    case UtteranceKind::PA:
    case UtteranceKind::TA: return {700, 1220, 2600, 3200, 3700};
    case UtteranceKind::E: return {530, 1840, 2480, 3300, 3750};
    case UtteranceKind::I: return {300, 2300, 3000, 3500, 4000};
    case UtteranceKind::O: return {570, 840, 2410, 3250, 3700};
    case UtteranceKind::U: return {300, 870, 2240, 3200, 3700};
    case UtteranceKind::Combined: break;
  }
  throw Error("no formant targets for the combined utterance");
}

std::vector<SpeakerRecord> synthesize_corpus(int n_per_class, std::uint64_t seed,
                                             const CorpusOptions& options) {
  if (n_per_class < 1) throw Error("synthesize_corpus: n_per_class must be at least 1");
  const std::uint64_t corpus_seed = derive_seed(seed, "corpus");
  std::vector<SpeakerRecord> records;
  records.reserve(static_cast<std::size_t>(5 * n_per_class));
  int global = 0;
  for (int label = 1; label <= kNumClasses; ++label) {
    const SeverityTraits traits = severity_traits(label);
    for (int i = 0; i < n_per_class; ++i, ++global) {
      const std::uint64_t speaker_seed = derive_seed(corpus_seed, static_cast<std::uint64_t>(global));
      std::mt19937_64 rng(derive_seed(speaker_seed, "demographics"));
      std::normal_distribution<double> normal(0.0, 1.0);
      const int slot = i % 4;
      SpeakerRecord rec;
      char id[32];
      std::snprintf(id, sizeof id, "%s-%04d", options.id_prefix.c_str(), global);
      rec.speaker_id = id;
      rec.severity_label = label;
      rec.gender = (slot == 0 || slot == 3) ? Gender::Female : Gender::Male;
      const int age_lo = slot == 2 ? 60 : 30;
      const int age_hi = slot == 1 ? 59 : 85;
      rec.age_years = std::uniform_int_distribution<int>(age_lo, age_hi)(rng);

      const bool female = rec.gender == Gender::Female;
      const double spread = options.speaker_spread;
      const double f0 = (female ? 200.0 : 115.0) * std::exp(spread * normal(rng)) * traits.strain_ratio;
      const double tract_scale = (female ? 1.08 : 1.0) * std::exp(0.02 * normal(rng));
      const double jitter = traits.jitter_pct * std::exp(spread * normal(rng));
      const double shimmer = traits.shimmer_pct * std::exp(spread * normal(rng));

      for (UtteranceKind kind : kRecordedKinds) {
        SynthesisProfile p;
        p.f0_hz = std::clamp(f0, 60.0, 400.0);
        p.jitter_pct = jitter;
        p.shimmer_pct = shimmer;
        p.formant_instability_pct = traits.formant_instability_pct;
        p.sample_rate_hz = options.sample_rate_hz;
        p.noise_floor = 1e-3;
        p.normalize = true;
        p.formants_hz = vowel_formants(kind);
        for (double& f : p.formants_hz) f *= tract_scale;
        if (is_vowel(kind)) {
          p.duration_s = options.vowel_duration_s;
        } else {
          p.duration_s = options.syllable_duration_s;
          SyllableTrain s;
          s.rate_hz = traits.syllable_rate_hz;
          s.burst_center_hz = kind == UtteranceKind::KA ? 1800.0 : kind == UtteranceKind::PA ? 900.0 : 3500.0;
          p.syllables = s;
        }
        rec.utterances[kind] =
            synthesize_utterance(p, derive_seed(speaker_seed, to_string(kind))).clip;
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace dys
