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

#include "dys/eval.hpp"

#include <cstdio>

namespace dys {
namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const LabelPair> pairs) {
  if (pairs.empty()) throw Error("confusion_matrix: no label pairs");
  ConfusionMatrix m;
  for (const auto& [t, p] : pairs) {
    if (!valid_label(t) || !valid_label(p)) {
      throw Error("confusion_matrix: label pair (" + std::to_string(t) + ", " + std::to_string(p) +
                  ") outside 1..5");
    }
    ++m.counts(t - 1, p - 1);
  }
  return m;
}

MetricsReport metrics(const ConfusionMatrix& m) {
  if ((m.counts.array() < 0).any()) throw Error("metrics: negative count in confusion matrix");
  MetricsReport r;
  r.total = m.total();
  if (r.total <= 0) throw Error("metrics: empty confusion matrix");
  r.correct = m.correct();
  r.accuracy = static_cast<double>(r.correct) / r.total;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto k = static_cast<std::size_t>(c);
    const int tp = m.counts(c, c);
    const int predicted = m.counts.col(c).sum();
    const int actual = m.counts.row(c).sum();
    r.support[k] = actual;
    r.precision[k] = predicted > 0 ? static_cast<double>(tp) / predicted : 0.0;
    r.recall[k] = actual > 0 ? static_cast<double>(tp) / actual : 0.0;
    const double denom = r.precision[k] + r.recall[k];
    r.f1[k] = denom > 0.0 ? 2.0 * r.precision[k] * r.recall[k] / denom : 0.0;
    r.macro_f1 += r.f1[k] / kNumClasses;
    r.weighted_f1 += r.f1[k] * actual / r.total;
  }
  return r;
}

std::string format_report_text(const ConfusionMatrix& m, const MetricsReport& r) {
  std::string s = "confusion matrix (rows = true, columns = predicted)\n      ";
  for (int p = 1; p <= kNumClasses; ++p) s += fmt("%6.0f", p);
  s += '\n';
  for (int t = 1; t <= kNumClasses; ++t) {
    s += fmt("  %-4.0f", t);
    for (int p = 1; p <= kNumClasses; ++p) s += fmt("%6.0f", m.at(t, p));
    s += '\n';
  }
  s += "\nclass  precision  recall      f1  support\n";
  for (int c = 0; c < kNumClasses; ++c) {
    const auto k = static_cast<std::size_t>(c);
    s += fmt("%5.0f", c + 1) + fmt("%11.4f", r.precision[k]) + fmt("%8.4f", r.recall[k]) +
         fmt("%8.4f", r.f1[k]) + fmt("%9.0f", r.support[k]) + '\n';
  }
  s += "\naccuracy     " + fmt("%.4f", r.accuracy) + " (" + std::to_string(r.correct) + "/" +
       std::to_string(r.total) + ")\n";
  s += "macro_f1     " + fmt("%.4f", r.macro_f1) + '\n';
  s += "weighted_f1  " + fmt("%.4f", r.weighted_f1) + '\n';
  return s;
}

std::string format_report_kv(const ConfusionMatrix& m, const MetricsReport& r) {
  std::string s;
  s += "total=" + std::to_string(r.total) + '\n';
  s += "correct=" + std::to_string(r.correct) + '\n';
  s += "accuracy=" + fmt("%.17g", r.accuracy) + '\n';
  s += "macro_f1=" + fmt("%.17g", r.macro_f1) + '\n';
  s += "weighted_f1=" + fmt("%.17g", r.weighted_f1) + '\n';
  for (int c = 0; c < kNumClasses; ++c) {
    const auto k = static_cast<std::size_t>(c);
    const std::string id = std::to_string(c + 1);
    s += "precision_" + id + "=" + fmt("%.17g", r.precision[k]) + '\n';
    s += "recall_" + id + "=" + fmt("%.17g", r.recall[k]) + '\n';
    s += "f1_" + id + "=" + fmt("%.17g", r.f1[k]) + '\n';
    s += "support_" + id + "=" + std::to_string(r.support[k]) + '\n';
  }
  for (int t = 1; t <= kNumClasses; ++t) {
    for (int p = 1; p <= kNumClasses; ++p) {
      s += "cm_" + std::to_string(t) + "_" + std::to_string(p) + "=" + std::to_string(m.at(t, p)) + '\n';
    }
  }
  return s;
}

}  // namespace dys
