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

#include "dys/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dys/wav.hpp"

namespace dys {
namespace {

constexpr std::array<std::string_view, 9> kKindNames = {"A",  "E",  "I",  "O",       "U",
                                                        "KA", "PA", "TA", "Combined"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  s.erase(s.find_last_not_of(ws) + 1);
  return s;
}

const std::array<std::string_view, 12> kManifestHeader = {
    "speaker_id", "age",    "gender", "label",   "path_A",  "path_E",
    "path_I",     "path_O", "path_U", "path_KA", "path_PA", "path_TA"};

}  // namespace

void AudioClip::validate() const {
  if (sample_rate_hz <= 0) throw Error("audio clip has non-positive sample rate");
  if (samples.size() == 0) throw Error("audio clip is empty");
  if (!samples.allFinite()) throw Error("audio clip contains non-finite samples");
}

std::string_view to_string(UtteranceKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

UtteranceKind parse_utterance_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == text) return static_cast<UtteranceKind>(i);
  }
  throw Error("unknown utterance kind '" + std::string(text) + "'");
}

bool is_vowel(UtteranceKind kind) {
  return kind == UtteranceKind::A || kind == UtteranceKind::E || kind == UtteranceKind::I ||
         kind == UtteranceKind::O || kind == UtteranceKind::U;
}

std::string_view to_string(Gender gender) { return gender == Gender::Female ? "F" : "M"; }

const AudioClip& SpeakerRecord::clip(UtteranceKind kind) const {
  auto it = utterances.find(kind);
  if (it == utterances.end()) {
    throw Error("speaker " + speaker_id + " has no utterance " + std::string(to_string(kind)));
  }
  return it->second;
}

void SpeakerRecord::validate() const {
  if (age_years <= 0) throw Error("speaker " + speaker_id + ": age must be positive");
  if (severity_label && !valid_label(*severity_label)) {
    throw Error("speaker " + speaker_id + ": label " + std::to_string(*severity_label) +
                " outside 1..5");
  }
  if (utterances.size() != kRecordedKinds.size()) {
    throw Error("speaker " + speaker_id + ": expected 8 utterances, have " +
                std::to_string(utterances.size()));
  }
  for (UtteranceKind kind : kRecordedKinds) clip(kind).validate();
}

ClassWeights compute_class_weights(std::span<const int> labels) {
  std::array<std::size_t, kNumClasses> counts{};
  for (int label : labels) {
    if (!valid_label(label)) throw Error("class label " + std::to_string(label) + " outside 1..5");
    ++counts[static_cast<std::size_t>(label - 1)];
  }
  ClassWeights w;
  const double total = static_cast<double>(labels.size());
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[c] == 0) throw Error("class " + std::to_string(c + 1) + " is absent");
    w.weight[c] = total / (kNumClasses * static_cast<double>(counts[c]));
  }
  return w;
}

AudioClip concat_utterances(const SpeakerRecord& record, std::span<const UtteranceKind> order) {
  if (order.empty()) throw Error("concatenation order is empty");
  AudioClip out;
  out.sample_rate_hz = record.clip(order.front()).sample_rate_hz;
  Eigen::Index total = 0;
  for (UtteranceKind kind : order) {
    const AudioClip& c = record.clip(kind);
    if (c.sample_rate_hz != out.sample_rate_hz) {
      throw Error("speaker " + record.speaker_id + ": mismatched sample rates (" +
                  std::to_string(c.sample_rate_hz) + " vs " +
                  std::to_string(out.sample_rate_hz) + ")");
    }
    total += c.size();
  }
  out.samples.resize(total);
  Eigen::Index at = 0;
  for (UtteranceKind kind : order) {
    const AudioClip& c = record.clip(kind);
    out.samples.segment(at, c.size()) = c.samples;
    at += c.size();
  }
  return out;
}

std::vector<SpeakerRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::string line;
  if (!std::getline(in, line)) throw Error("manifest " + path.string() + " is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split_csv_line(line);
  if (header.size() != kManifestHeader.size()) {
    throw Error("manifest header: expected 12 columns, found " + std::to_string(header.size()));
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) != kManifestHeader[i]) {
      throw Error("manifest header: column " + std::to_string(i + 1) + " should be '" +
                  std::string(kManifestHeader[i]) + "'");
    }
  }

  std::vector<SpeakerRecord> records;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::string where = "manifest row " + std::to_string(row);
    auto fields = split_csv_line(line);
    if (fields.size() != kManifestHeader.size()) {
      throw Error(where + ": expected 12 fields, found " + std::to_string(fields.size()));
    }
    for (auto& f : fields) f = trim(f);
    SpeakerRecord rec;
    rec.speaker_id = fields[0];
    if (rec.speaker_id.empty()) throw Error(where + ", field speaker_id: empty");
    try {
      std::size_t used = 0;
      rec.age_years = std::stoi(fields[1], &used);
      if (used != fields[1].size() || rec.age_years <= 0) throw Error("");
    } catch (...) {
      throw Error(where + ", field age: invalid value '" + fields[1] + "'");
    }
    if (fields[2] == "F") {
      rec.gender = Gender::Female;
    } else if (fields[2] == "M") {
      rec.gender = Gender::Male;
    } else {
      throw Error(where + ", field gender: expected F or M, got '" + fields[2] + "'");
    }
    if (!fields[3].empty()) {
      int label = 0;
      try {
        std::size_t used = 0;
        label = std::stoi(fields[3], &used);
        if (used != fields[3].size()) throw Error("");
      } catch (...) {
        throw Error(where + ", field label: invalid value '" + fields[3] + "'");
      }
      if (!valid_label(label)) {
        throw Error(where + ", field label: " + std::to_string(label) + " outside 1..5");
      }
      rec.severity_label = label;
    }
    for (std::size_t k = 0; k < kRecordedKinds.size(); ++k) {
      const std::string& rel = fields[4 + k];
      const std::string field_name(kManifestHeader[4 + k]);
      if (rel.empty()) throw Error(where + ", field " + field_name + ": empty path");
      std::filesystem::path audio(rel);
      if (audio.is_relative()) audio = base / audio;
      if (!std::filesystem::exists(audio)) {
        throw Error(where + ", field " + field_name + ": missing file " + audio.string());
      }
      try {
        rec.utterances[kRecordedKinds[k]] = read_wav(audio);
      } catch (const Error& e) {
        throw Error(where + ", field " + field_name + ": " + e.what());
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::filesystem::path save_corpus(std::span<const SpeakerRecord> records,
                                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "audio");
  std::ostringstream manifest;
  for (std::size_t i = 0; i < kManifestHeader.size(); ++i) {
    manifest << (i ? "," : "") << kManifestHeader[i];
  }
  manifest << "\n";
  for (const SpeakerRecord& rec : records) {
    manifest << rec.speaker_id << "," << rec.age_years << "," << to_string(rec.gender) << ",";
    if (rec.severity_label) manifest << *rec.severity_label;
    for (UtteranceKind kind : kRecordedKinds) {
      const std::string rel = "audio/" + rec.speaker_id + "_" + std::string(to_string(kind)) + ".wav";
      write_wav(out_dir / rel, rec.clip(kind));
      manifest << "," << rel;
    }
    manifest << "\n";
  }
  const auto manifest_path = out_dir / "manifest.csv";
  write_file_atomic(manifest_path, manifest.str());
  return manifest_path;
}

}  // namespace dys
