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

#include "dys/cli.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "dys/corpus.hpp"
#include "dys/dsp.hpp"
#include "dys/phasefeat.hpp"

namespace dys {
namespace fs = std::filesystem;
namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("missing --") + what);
  if (!fs::is_regular_file(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

void require_output(const fs::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("missing --") + what);
  const fs::path parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) throw UsageError(std::string(what) + " directory does not exist: " + parent.string());
}

HierarchyConfig resolve_config(const RunConfig& run) {
  HierarchyConfig c = run.config ? load_hierarchy_config(*run.config) : HierarchyConfig{};
  if (run.fusion) c.fusion = *run.fusion;
  if (run.ties) c.ties = *run.ties;
  return c;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string acoustic_header(const HierarchyConfig&) {
  std::string h = "speaker_id,age,gender,label,sound,frame_ms,segment";
  for (const auto& n : SpeakerFeatureVector::acoustic_names()) h += ',' + n;
  return h + ",age_norm,gender_code,segment_fallback\n";
}

}  // namespace

FeatureSet parse_feature_set(std::string_view text) {
  if (text == "acoustic12") return FeatureSet::Acoustic12;
  if (text == "phase54") return FeatureSet::Phase54;
  if (text == "both") return FeatureSet::Both;
  throw UsageError("unknown feature set '" + std::string(text) + "' (expected acoustic12|phase54|both)");
}

fs::path kv_report_path(const fs::path& text_report) {
  fs::path p = text_report;
  return p.replace_extension(".kv");
}

fs::path cmd_synth(const RunConfig& run) {
  if (run.n_per_class < 1) throw UsageError("--n-per-class must be at least 1");
  if (run.out.empty()) throw UsageError("missing --out");
  spdlog::info("synthesizing {} speakers per class (seed {})", run.n_per_class, run.seed);
  const auto records = synthesize_corpus(run.n_per_class, run.seed);
  const fs::path manifest = save_corpus(records, run.out);
  spdlog::info("wrote {} speakers to {}", records.size(), manifest.string());
  return manifest;
}

ExtractSummary cmd_extract(const RunConfig& run) {
  require_file(run.manifest, "manifest");
  if (run.out.empty()) throw UsageError("missing --out");
  const HierarchyConfig config = resolve_config(run);
  const auto records = load_manifest(run.manifest);
  fs::create_directories(run.out);
  ExtractSummary summary;

  if (run.feature_set != FeatureSet::Phase54) {
    // One row per speaker and distinct (sound, frame, segment) of the config.
    std::vector<StageOneSpec> specs;
    std::set<std::tuple<int, double, int>> seen;
    for (const auto& s : config.stage1) {
      if (seen.insert({static_cast<int>(s.sound_category), s.frame_len_ms, static_cast<int>(s.segment)}).second) {
        specs.push_back(s);
      }
    }
    std::vector<std::vector<SpeakerFeatureVector>> rows(records.size());
    std::vector<std::vector<std::string>> warnings(records.size());
    parallel_for(records.size(), [&](std::size_t i) {
      for (const auto& spec : specs) {
        try {
          rows[i].push_back(build_feature_vector(records[i], spec));
        } catch (const std::exception& e) {
          warnings[i].push_back(records[i].speaker_id + " " + std::string(to_string(spec.sound_category)) + " (" +
                                g17(spec.frame_len_ms) + " ms, " + std::string(to_string(spec.segment)) +
                                "): " + e.what());
          rows[i].emplace_back();
          rows[i].back().age_norm = -1.0;  // marks a failed row
        }
      }
    });
    std::string csv = acoustic_header(config);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      for (std::size_t k = 0; k < specs.size(); ++k) {
        const auto& f = rows[i][k];
        if (f.age_norm < 0.0) continue;
        csv += r.speaker_id + ',' + std::to_string(r.age_years) + ',' + std::string(to_string(r.gender)) + ',' +
               (r.severity_label ? std::to_string(*r.severity_label) : std::string()) + ',' +
               std::string(to_string(specs[k].sound_category)) + ',' + g17(specs[k].frame_len_ms) + ',' +
               std::string(to_string(specs[k].segment));
        for (Eigen::Index j = 0; j < kAcousticDims; ++j) csv += ',' + g17(f.acoustic()(j));
        csv += ',' + g17(f.age_norm) + ',' + g17(f.gender_code) + ',' + (f.segment_fallback ? "1" : "0") + '\n';
        ++summary.acoustic_rows;
      }
      summary.warnings.insert(summary.warnings.end(), warnings[i].begin(), warnings[i].end());
    }
    write_file_atomic(run.out / "acoustic12.csv", csv);
  }

  if (run.feature_set != FeatureSet::Acoustic12) {
    std::vector<UtteranceKind> kinds(kRecordedKinds.begin(), kRecordedKinds.end());
    kinds.push_back(UtteranceKind::Combined);
    std::vector<std::string> chunks(records.size());
    std::vector<std::vector<std::string>> warnings(records.size());
    std::vector<int> counts(records.size(), 0);
    parallel_for(records.size(), [&](std::size_t i) {
      const auto& r = records[i];
      for (UtteranceKind kind : kinds) {
        try {
          const AudioClip clip = kind == UtteranceKind::Combined ? concat_utterances(r, kCombinedOrder) : r.clip(kind);
          const PhaseFrameMatrix m = utterance_phase_matrix(trim_silence(clip));
          for (Eigen::Index t = 0; t < m.valid_frame_count; ++t) {
            std::string line = r.speaker_id + ',' + std::string(to_string(kind)) + ',' + std::to_string(t);
            for (Eigen::Index j = 0; j < kPhaseDims; ++j) line += ',' + g17(m.frames(t, j));
            chunks[i] += line + '\n';
            ++counts[i];
          }
        } catch (const std::exception& e) {
          warnings[i].push_back(r.speaker_id + " " + std::string(to_string(kind)) + ": " + e.what());
        }
      }
    });
    std::string csv = "speaker_id,utterance,frame";
    for (const auto& n : PhaseFrame::column_names()) csv += ',' + n;
    csv += '\n';
    for (std::size_t i = 0; i < records.size(); ++i) {
      csv += chunks[i];
      summary.phase_rows += counts[i];
      summary.warnings.insert(summary.warnings.end(), warnings[i].begin(), warnings[i].end());
    }
    write_file_atomic(run.out / "phase54.csv", csv);
  }

  std::string report = "acoustic_rows=" + std::to_string(summary.acoustic_rows) + '\n' +
                       "phase_rows=" + std::to_string(summary.phase_rows) + '\n' +
                       "warnings=" + std::to_string(summary.warnings.size()) + '\n';
  for (const auto& w : summary.warnings) {
    report += "warning: " + w + '\n';
    spdlog::warn("{}", w);
  }
  write_file_atomic(run.out / "extract_report.txt", report);
  spdlog::info("extracted {} acoustic rows, {} phase rows, {} warnings", summary.acoustic_rows, summary.phase_rows,
               summary.warnings.size());
  return summary;
}

TrainReport cmd_train(const RunConfig& run) {
  require_file(run.manifest, "manifest");
  require_output(run.model, "model");
  const HierarchyConfig config = resolve_config(run);
  const auto records = load_manifest(run.manifest);
  TrainReport report;
  const HierarchyModel model = train_hierarchy(records, config, run.seed, &report);
  save_hierarchy(model, run.model);
  for (const auto& w : report.warnings) spdlog::warn("{}", w);
  for (const auto& m : report.stage1) {
    std::printf("stage-1 model %d: %d speakers (%d positive), train accuracy %.4f\n", m.model_id, m.n_train,
                m.n_positive, m.train_accuracy);
  }
  std::printf("stage-2 forest: %zu speakers, train accuracy %.4f\n", records.size(), report.stage2_train_accuracy);
  spdlog::info("model written to {}", run.model.string());
  return report;
}

int cmd_predict(const RunConfig& run) {
  require_file(run.manifest, "manifest");
  require_file(run.model, "model");
  require_output(run.predictions, "predictions");
  HierarchyModel model = load_hierarchy(run.model);
  if (run.fusion) model.config.fusion = *run.fusion;
  if (run.ties) model.config.ties = *run.ties;
  const auto records = load_manifest(run.manifest);
  std::vector<HierarchyPrediction> preds(records.size());
  parallel_for(records.size(), [&](std::size_t i) { preds[i] = predict_hierarchy(model, records[i]); });

  std::string csv = "speaker_id,predicted_label";
  for (const auto& s : model.config.stage1) csv += ",p_model" + std::to_string(s.model_id);
  csv += '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& w : preds[i].warnings) spdlog::warn("{}", w);
    csv += records[i].speaker_id + ',' + std::to_string(preds[i].label);
    for (double p : preds[i].stage1_probabilities) csv += ',' + g17(p);
    csv += '\n';
  }
  write_file_atomic(run.predictions, csv);
  spdlog::info("wrote {} predictions to {}", records.size(), run.predictions.string());
  return static_cast<int>(records.size());
}

MetricsReport cmd_evaluate(const RunConfig& run) {
  require_file(run.predictions, "predictions");
  require_file(run.manifest, "manifest");
  require_output(run.out, "out");
  std::map<std::string, int> labels;
  for (const auto& r : load_manifest(run.manifest)) {
    if (r.severity_label) labels[r.speaker_id] = *r.severity_label;
  }
  std::ifstream in(run.predictions);
  std::string line;
  if (!std::getline(in, line) || split_csv(line).size() < 2 || split_csv(line)[0] != "speaker_id") {
    throw Error(run.predictions.string() + ": missing predictions header");
  }
  std::vector<LabelPair> pairs;
  std::set<std::string> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = run.predictions.string() + " line " + std::to_string(line_no);
    if (cells.size() < 2) throw Error(where + ": expected speaker_id and predicted_label");
    const std::string& id = cells[0];
    if (!seen.insert(id).second) throw Error(where + ": speaker " + id + " predicted twice");
    const auto it = labels.find(id);
    if (it == labels.end()) throw Error(where + ": speaker " + id + " has no label in the manifest");
    int predicted = 0;
    try {
      predicted = std::stoi(cells[1]);
    } catch (const std::exception&) {
      throw Error(where + ": bad predicted label '" + cells[1] + "'");
    }
    pairs.emplace_back(it->second, predicted);
  }
  const ConfusionMatrix cm = confusion_matrix(pairs);
  const MetricsReport report = metrics(cm);
  const std::string text = format_report_text(cm, report);
  write_file_atomic(run.out, text);
  write_file_atomic(kv_report_path(run.out), format_report_kv(cm, report));
  std::fputs(text.c_str(), stdout);
  return report;
}

}  // namespace dys
