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

#ifndef DYS_TESTS_FIXTURES_HPP
#define DYS_TESTS_FIXTURES_HPP

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dys/corpus.hpp"
#include "dys/eval.hpp"
#include "dys/glottal.hpp"

namespace dys::testing {

/// Published validation confusion matrices, rows = true class 1..5.
inline ConfusionMatrix matrix_from_rows(const std::array<std::array<int, 5>, 5>& rows) {
  ConfusionMatrix m;
  for (int t = 0; t < 5; ++t) {
    for (int p = 0; p < 5; ++p) m.counts(t, p) = rows[t][p];
  }
  return m;
}

// Acoustic hierarchy, default configuration.
inline ConfusionMatrix validation_matrix_a() {
  return matrix_from_rows({{{2, 0, 0, 0, 0}, {0, 2, 2, 0, 0}, {0, 0, 8, 1, 2}, {0, 0, 4, 6, 4}, {0, 0, 5, 2, 14}}});
}
// Phase features, transformer.
inline ConfusionMatrix validation_matrix_b() {
  return matrix_from_rows({{{1, 1, 0, 0, 0}, {1, 3, 0, 0, 0}, {0, 1, 7, 0, 4}, {0, 3, 1, 5, 5}, {0, 2, 0, 2, 17}}});
}
// Phase features with speaker-level loss.
inline ConfusionMatrix validation_matrix_c() {
  return matrix_from_rows({{{2, 0, 0, 0, 0}, {0, 2, 0, 2, 0}, {0, 0, 7, 3, 2}, {0, 0, 1, 9, 4}, {0, 0, 3, 4, 14}}});
}
// Multi-modal fusion.
inline ConfusionMatrix validation_matrix_d() {
  return matrix_from_rows({{{1, 0, 0, 1, 0}, {0, 3, 0, 0, 1}, {0, 0, 8, 3, 1}, {0, 0, 0, 12, 2}, {0, 0, 0, 3, 18}}});
}

/// Per-class speaker counts of the labelled training set.
inline std::vector<int> training_set_labels() {
  std::vector<int> labels;
  const int counts[5] = {4, 22, 45, 62, 86};
  for (int c = 0; c < 5; ++c) labels.insert(labels.end(), counts[c], c + 1);
  return labels;
}

/// Fraction of `truth` having a detection within `tol` samples.
inline double matched_fraction(const std::vector<Eigen::Index>& truth, const std::vector<Eigen::Index>& detected,
                               Eigen::Index tol) {
  if (truth.empty()) return 0.0;
  std::size_t hit = 0;
  for (Eigen::Index t : truth) {
    const auto it = std::lower_bound(detected.begin(), detected.end(), t - tol);
    if (it != detected.end() && *it <= t + tol) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

inline SynthesisProfile steady_voice(double f0, int rate = 8000, double seconds = 1.0) {
  SynthesisProfile p;
  p.f0_hz = f0;
  p.sample_rate_hz = rate;
  p.duration_s = seconds;
  return p;
}

inline AudioClip sine_clip(double freq, double seconds, int rate, double amp = 0.5) {
  AudioClip c;
  c.sample_rate_hz = rate;
  const auto n = static_cast<Eigen::Index>(std::llround(seconds * rate));
  c.samples = Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1))
                  .unaryExpr([&](double i) { return amp * std::sin(2.0 * M_PI * freq * i / rate); });
  return c;
}

inline AudioClip noise_clip(double seconds, int rate, std::uint64_t seed, double sd = 0.2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  AudioClip c;
  c.sample_rate_hz = rate;
  c.samples.resize(static_cast<Eigen::Index>(seconds * rate));
  for (auto& v : c.samples) v = g(rng);
  return c;
}

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dys_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace dys::testing

#endif  // DYS_TESTS_FIXTURES_HPP
