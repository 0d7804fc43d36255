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

#include "dys/hier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "dys/serialize.hpp"

namespace dys {
namespace {

constexpr double kInitialSpan_s = 20.0;
constexpr double kLaterSpan_s = 10.0;
constexpr double kOutOfGroupInput = 0.5;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_labels(const std::vector<int>& labels) {
  std::string s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(labels[i]);
  }
  return s;
}

int parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(where + ": expected an integer, got '" + s + "'");
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(where + ": expected a number, got '" + s + "'");
}

bool parse_bool(const std::string& s, const std::string& where) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw Error(where + ": expected true or false, got '" + s + "'");
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Feature extraction with a per-speaker cache

struct Span {
  Eigen::Index start = 0;
  Eigen::Index length = 0;
  bool fell_back = false;
};

Span segment_span(const AudioClip& clip, Segment segment) {
  const Eigen::Index n = clip.size();
  const auto at = [&](double seconds) {
    return static_cast<Eigen::Index>(std::llround(seconds * clip.sample_rate_hz));
  };
  switch (segment) {
    case Segment::Full:
      return {0, n, false};
    case Segment::Initial20s:
      return {0, std::min(n, at(kInitialSpan_s)), false};
    case Segment::Later10s: {
      const Eigen::Index start = at(kInitialSpan_s);
      if (start >= n) return {0, n, true};
      return {start, std::min(n, start + at(kLaterSpan_s)) - start, false};
    }
  }
  throw Error("unknown segment");
}

class FeatureExtractor {
 public:
  explicit FeatureExtractor(const SpeakerRecord& record) : record_(record) {}

  // Formant failures propagate when `strict`, otherwise they become zeros
  // and a warning.
  SpeakerFeatureVector extract(const StageOneSpec& spec, bool strict, std::vector<std::string>& warnings) {
    const AudioClip& clip = record_.clip(spec.sound_category);
    const Span span = segment_span(clip, spec.segment);
    SpeakerFeatureVector out;
    out.segment_fallback = span.fell_back;
    out.age_norm = normalize_age(record_.age_years);
    out.gender_code = encode_gender(record_.gender);
    if (span.fell_back && warned_.insert(std::make_tuple(static_cast<int>(spec.sound_category), span.start, -1.0)).second) {
      warnings.push_back(record_.speaker_id + " " + std::string(to_string(spec.sound_category)) + ": clip of " +
                         fmt_g(clip.duration_s()) + " s ends before the " + std::string(to_string(spec.segment)) +
                         " segment; using the full clip");
    }
    const auto kind = static_cast<int>(spec.sound_category);
    const auto gkey = std::make_tuple(kind, span.start, span.length);
    auto g = glottal_.find(gkey);
    if (g == glottal_.end()) {
      const AudioClip seg = sub_clip(clip, span);
      g = glottal_.emplace(gkey, extract_glottal_params(detect_gci(seg), seg)).first;
    }
    out.glottal = g->second;

    const auto fkey = std::make_tuple(kind, span.start, span.length, spec.frame_len_ms);
    auto f = formants_.find(fkey);
    if (f == formants_.end()) {
      std::array<double, 5> values{};
      try {
        values = estimate_formants(sub_clip(clip, span), spec.frame_len_ms).f_hz;
      } catch (const PartialFormantError& e) {
        if (strict) throw;
        warnings.push_back(record_.speaker_id + " " + std::string(to_string(spec.sound_category)) + " (" +
                           fmt_g(spec.frame_len_ms) + " ms frames): " + e.what() + "; formants set to 0");
      }
      f = formants_.emplace(fkey, values).first;
    }
    out.formants_hz = f->second;
    return out;
  }

 private:
  static AudioClip sub_clip(const AudioClip& clip, const Span& span) {
    if (span.start == 0 && span.length == clip.size()) return clip;
    AudioClip out;
    out.sample_rate_hz = clip.sample_rate_hz;
    out.samples = clip.samples.segment(span.start, span.length);
    return out;
  }

  const SpeakerRecord& record_;
  std::map<std::tuple<int, Eigen::Index, Eigen::Index>, GlottalParams> glottal_;
  std::map<std::tuple<int, Eigen::Index, Eigen::Index, double>, std::array<double, 5>> formants_;
  std::set<std::tuple<int, Eigen::Index, double>> warned_;
};

std::vector<SpeakerFeatureVector> speaker_features(const SpeakerRecord& record, std::span<const StageOneSpec> specs,
                                                   std::vector<std::string>& warnings) {
  FeatureExtractor extractor(record);
  std::vector<SpeakerFeatureVector> out;
  out.reserve(specs.size());
  for (const auto& spec : specs) out.push_back(extractor.extract(spec, false, warnings));
  return out;
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

// Model file sections.
constexpr std::string_view kMagic = "DYSMODEL";
constexpr std::uint32_t kFormatVersion = 1;
enum SectionTag : std::uint32_t { kConfigSection = 1, kStageOneSection = 2, kStageTwoSection = 3 };

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(SubgroupKey key) {
  switch (key) {
    case SubgroupKey::Female: return "F";
    case SubgroupKey::MaleUnder60: return "M<60";
    case SubgroupKey::MaleOver60: return "M>=60";
    case SubgroupKey::All: return "All";
  }
  return "?";
}

SubgroupKey parse_subgroup(std::string_view text) {
  for (auto k : {SubgroupKey::Female, SubgroupKey::MaleUnder60, SubgroupKey::MaleOver60, SubgroupKey::All}) {
    if (text == to_string(k)) return k;
  }
  throw Error("unknown subgroup '" + std::string(text) + "' (expected F, M<60, M>=60 or All)");
}

std::string_view to_string(Segment segment) {
  switch (segment) {
    case Segment::Full: return "Full";
    case Segment::Initial20s: return "Initial20s";
    case Segment::Later10s: return "Later10s";
  }
  return "?";
}

Segment parse_segment(std::string_view text) {
  for (auto s : {Segment::Full, Segment::Initial20s, Segment::Later10s}) {
    if (text == to_string(s)) return s;
  }
  throw Error("unknown segment '" + std::string(text) + "' (expected Full, Initial20s or Later10s)");
}

bool in_subgroup(SubgroupKey key, Gender gender, int age_years) {
  switch (key) {
    case SubgroupKey::Female: return gender == Gender::Female;
    case SubgroupKey::MaleUnder60: return gender == Gender::Male && age_years < 60;
    case SubgroupKey::MaleOver60: return gender == Gender::Male && age_years >= 60;
    case SubgroupKey::All: return true;
  }
  return false;
}

void StageOneSpec::validate() const {
  const std::string who = "stage-1 model " + std::to_string(model_id);
  if (model_id < 1) throw Error(who + ": model_id must be positive");
  if (positive_classes.empty() || negative_classes.empty()) throw Error(who + ": both class sets must be non-empty");
  for (const auto* set : {&positive_classes, &negative_classes}) {
    for (int c : *set) {
      if (!valid_label(c)) throw Error(who + ": class " + std::to_string(c) + " outside 1..5");
      if (std::count(set->begin(), set->end(), c) > 1) throw Error(who + ": class " + std::to_string(c) + " repeated");
    }
  }
  for (int c : positive_classes) {
    if (contains(negative_classes, c)) throw Error(who + ": class " + std::to_string(c) + " is on both sides");
  }
  if (sound_category == UtteranceKind::Combined || sound_category == UtteranceKind::PA ||
      sound_category == UtteranceKind::TA) {
    throw Error(who + ": sound category " + std::string(to_string(sound_category)) +
                " is not usable for glottal analysis");
  }
  if (n_estimators < 1) throw Error(who + ": n_estimators must be at least 1");
  if (!(frame_len_ms > 0.0) || !std::isfinite(frame_len_ms)) throw Error(who + ": frame length must be positive");
}

std::vector<StageOneSpec> default_hierarchy_config() {
  using K = UtteranceKind;
  using G = SubgroupKey;
  return {
      {1, G::Female, {3}, {4, 5}, K::A, 200, 100.0, Segment::Full},
      {2, G::Female, {4}, {5}, K::KA, 100, 100.0, Segment::Initial20s},
      {3, G::MaleUnder60, {3}, {4, 5}, K::U, 100, 50.0, Segment::Later10s},
      {4, G::MaleUnder60, {4}, {5}, K::O, 100, 500.0, Segment::Full},
      {5, G::MaleOver60, {3}, {4, 5}, K::E, 200, 100.0, Segment::Initial20s},
      {6, G::MaleOver60, {4}, {5}, K::I, 100, 100.0, Segment::Initial20s},
      {7, G::All, {1}, {2}, K::I, 100, 50.0, Segment::Full},
      {8, G::All, {1}, {2}, K::U, 100, 50.0, Segment::Full},
  };
}

void HierarchyConfig::validate() const {
  if (stage1.empty()) throw Error("hierarchy config: no stage-1 models");
  std::set<int> ids;
  for (const auto& s : stage1) {
    s.validate();
    if (!ids.insert(s.model_id).second) throw Error("hierarchy config: duplicate model_id " + std::to_string(s.model_id));
  }
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw Error("hierarchy config: learning rate must lie in (0, 1]");
  if (max_depth < 1) throw Error("hierarchy config: max_depth must be at least 1");
  stage2.validate();
}

std::string format_hierarchy_config(const HierarchyConfig& c) {
  std::string s = "# stage-2 and boosting settings\n";
  s += "learning_rate=" + fmt_g(c.learning_rate) + '\n';
  s += "max_depth=" + std::to_string(c.max_depth) + '\n';
  s += "stage2_trees=" + std::to_string(c.stage2.n_trees) + '\n';
  s += "stage2_depth=" + std::to_string(c.stage2.max_depth) + '\n';
  s += std::string("stage2_bootstrap=") + (c.stage2.bootstrap ? "true" : "false") + '\n';
  s += std::string("evaluate_out_of_group=") + (c.evaluate_out_of_group ? "true" : "false") + '\n';
  s += std::string("fusion=") + to_string(c.fusion) + '\n';
  s += std::string("tie_policy=") + to_string(c.ties) + '\n';
  s += "# stage-1 models\n";
  s += "model_id,subgroup,positive,negative,sound,n_estimators,frame_ms,segment\n";
  for (const auto& m : c.stage1) {
    s += std::to_string(m.model_id) + ',' + std::string(to_string(m.subgroup)) + ',' + join_labels(m.positive_classes) +
         ',' + join_labels(m.negative_classes) + ',' + std::string(to_string(m.sound_category)) + ',' +
         std::to_string(m.n_estimators) + ',' + fmt_g(m.frame_len_ms) + ',' + std::string(to_string(m.segment)) + '\n';
  }
  return s;
}

HierarchyConfig parse_hierarchy_config(std::string_view text) {
  HierarchyConfig c;
  c.stage1.clear();
  bool header_seen = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = "config line " + std::to_string(line_no);
    std::string line = trim(raw);
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line = trim(line.substr(3));
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen && line.find(',') == std::string::npos) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(where + ": expected key=value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key == "learning_rate") c.learning_rate = parse_double(value, where);
      else if (key == "max_depth") c.max_depth = parse_int(value, where);
      else if (key == "stage2_trees") c.stage2.n_trees = parse_int(value, where);
      else if (key == "stage2_depth") c.stage2.max_depth = parse_int(value, where);
      else if (key == "stage2_bootstrap") c.stage2.bootstrap = parse_bool(value, where);
      else if (key == "evaluate_out_of_group") c.evaluate_out_of_group = parse_bool(value, where);
      else if (key == "fusion") c.fusion = parse_fusion_policy(value);
      else if (key == "tie_policy") c.ties = parse_tie_policy(value);
      else throw Error(where + ": unknown setting '" + key + "'");
      continue;
    }
    const auto cells = split(line, ',');
    if (!header_seen) {
      if (cells.size() != 8 || cells[0] != "model_id") {
        throw Error(where + ": expected header model_id,subgroup,positive,negative,sound,n_estimators,frame_ms,segment");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != 8) throw Error(where + ": expected 8 columns, found " + std::to_string(cells.size()));
    StageOneSpec s;
    s.model_id = parse_int(cells[0], where + ", field model_id");
    s.subgroup = parse_subgroup(cells[1]);
    for (const auto& p : split(cells[2], ';')) s.positive_classes.push_back(parse_int(p, where + ", field positive"));
    for (const auto& p : split(cells[3], ';')) s.negative_classes.push_back(parse_int(p, where + ", field negative"));
    s.sound_category = parse_utterance_kind(cells[4]);
    s.n_estimators = parse_int(cells[5], where + ", field n_estimators");
    s.frame_len_ms = parse_double(cells[6], where + ", field frame_ms");
    s.segment = parse_segment(cells[7]);
    try {
      s.validate();
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
    c.stage1.push_back(std::move(s));
  }
  if (!header_seen) throw Error("hierarchy config: missing model table header");
  c.validate();
  return c;
}

HierarchyConfig load_hierarchy_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open hierarchy config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_hierarchy_config(buf.str());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void save_hierarchy_config(const HierarchyConfig& config, const std::filesystem::path& path) {
  write_file_atomic(path, format_hierarchy_config(config));
}

// ---------------------------------------------------------------------------

double normalize_age(int age_years) { return std::clamp(age_years / 100.0, 0.0, 1.0); }

double encode_gender(Gender gender) { return gender == Gender::Female ? 0.9 : 0.1; }

Eigen::Matrix<double, kAcousticDims, 1> SpeakerFeatureVector::acoustic() const {
  Eigen::Matrix<double, kAcousticDims, 1> v;
  const auto g = glottal.values();
  for (int i = 0; i < 5; ++i) v(i) = formants_hz[static_cast<std::size_t>(i)];
  for (int i = 0; i < 7; ++i) v(5 + i) = g[static_cast<std::size_t>(i)];
  return v;
}

Eigen::Matrix<double, kSpeakerDims, 1> SpeakerFeatureVector::to_vector() const {
  Eigen::Matrix<double, kSpeakerDims, 1> v;
  v << acoustic(), age_norm, gender_code;
  return v;
}

std::vector<std::string> SpeakerFeatureVector::acoustic_names() {
  std::vector<std::string> names = {"F1", "F2", "F3", "F4", "F5"};
  for (auto n : GlottalParams::kNames) names.emplace_back(n);
  return names;
}

AudioClip apply_segment(const AudioClip& clip, Segment segment, bool* fell_back) {
  const Span span = segment_span(clip, segment);
  if (fell_back) *fell_back = span.fell_back;
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples = clip.samples.segment(span.start, span.length);
  return out;
}

SpeakerFeatureVector build_feature_vector(const SpeakerRecord& record, const StageOneSpec& spec) {
  FeatureExtractor extractor(record);
  std::vector<std::string> ignored;
  return extractor.extract(spec, true, ignored);
}

FeatureTable extract_feature_table(std::span<const SpeakerRecord> records, std::span<const StageOneSpec> specs) {
  FeatureTable table;
  table.features.resize(records.size());
  std::vector<std::vector<std::string>> warnings(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    table.features[i] = speaker_features(records[i], specs, warnings[i]);
  });
  for (auto& w : warnings) table.warnings.insert(table.warnings.end(), w.begin(), w.end());
  return table;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd stage2_input(const HierarchyModel& model, std::span<const SpeakerFeatureVector> features,
                             const SpeakerRecord& record, std::vector<double>* probabilities) {
  const auto& specs = model.config.stage1;
  if (features.size() != specs.size() || model.stage1.size() != specs.size()) {
    throw Error("stage2_input: feature/model count does not match the configuration");
  }
  const auto n = static_cast<Eigen::Index>(specs.size());
  Eigen::VectorXd input(n + 2);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& spec = specs[static_cast<std::size_t>(k)];
    const bool inside = in_subgroup(spec.subgroup, record.gender, record.age_years);
    input(k) = (inside || model.config.evaluate_out_of_group)
                   ? predict_proba(model.stage1[static_cast<std::size_t>(k)],
                                   features[static_cast<std::size_t>(k)].acoustic().transpose())
                   : kOutOfGroupInput;
  }
  input(n) = normalize_age(record.age_years);
  input(n + 1) = encode_gender(record.gender);
  if (probabilities) probabilities->assign(input.data(), input.data() + n);
  return input;
}

HierarchyModel train_hierarchy(std::span<const SpeakerRecord> records, const HierarchyConfig& config,
                               std::uint64_t seed, TrainReport* report) {
  config.validate();
  if (records.empty()) throw Error("train_hierarchy: no training speakers");
  std::array<int, kNumClasses> class_count{};
  for (const auto& r : records) {
    if (!r.severity_label) throw Error("train_hierarchy: speaker " + r.speaker_id + " has no label");
    if (!valid_label(*r.severity_label)) throw Error("train_hierarchy: speaker " + r.speaker_id + " has an invalid label");
    ++class_count[static_cast<std::size_t>(*r.severity_label - 1)];
  }
  for (int c = 1; c <= kNumClasses; ++c) {
    if (class_count[static_cast<std::size_t>(c - 1)] == 0) {
      throw Error("train_hierarchy: training corpus has no speakers of class " + std::to_string(c));
    }
  }

  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = TrainReport{};
  FeatureTable table = extract_feature_table(records, config.stage1);
  rep.warnings = table.warnings;

  HierarchyModel model;
  model.config = config;
  model.stage1.resize(config.stage1.size());
  rep.stage1.resize(config.stage1.size());
  parallel_for(config.stage1.size(), [&](std::size_t k) {
    const StageOneSpec& spec = config.stage1[k];
    const std::string who = "stage-1 model " + std::to_string(spec.model_id);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      const int label = *r.severity_label;
      if (!in_subgroup(spec.subgroup, r.gender, r.age_years)) continue;
      if (contains(spec.positive_classes, label) || contains(spec.negative_classes, label)) rows.push_back(i);
    }
    if (rows.empty()) {
      throw Error(who + ": no training speakers in subgroup " + std::string(to_string(spec.subgroup)) +
                  " with classes " + join_labels(spec.positive_classes) + " vs " + join_labels(spec.negative_classes));
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), kAcousticDims);
    Eigen::VectorXi y(static_cast<Eigen::Index>(rows.size()));
    int n_pos = 0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto i = rows[j];
      x.row(static_cast<Eigen::Index>(j)) = table.features[i][k].acoustic().transpose();
      y(static_cast<Eigen::Index>(j)) = contains(spec.positive_classes, *records[i].severity_label) ? 1 : 0;
      n_pos += y(static_cast<Eigen::Index>(j));
    }
    const auto n = static_cast<int>(rows.size());
    if (n_pos == 0 || n_pos == n) {
      throw Error(who + ": training subset holds only " + std::string(n_pos ? "positive" : "negative") +
                  " speakers (" + std::to_string(n) + ")");
    }
    // Inverse-frequency weights balance the two sides: N / (2 n_side).
    Eigen::VectorXd w(n);
    for (Eigen::Index j = 0; j < n; ++j) w(j) = n / (2.0 * (y(j) ? n_pos : n - n_pos));

    GbmParams params;
    params.n_estimators = spec.n_estimators;
    params.learning_rate = config.learning_rate;
    params.max_depth = config.max_depth;
    params.seed = derive_seed(seed, "stage1/" + std::to_string(spec.model_id));
    try {
      model.stage1[k] = train_gbm(x, y, w, params);
    } catch (const Error& e) {
      throw Error(who + ": " + e.what());
    }
    int correct = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      correct += (predict_proba(model.stage1[k], x.row(j)) >= 0.5 ? 1 : 0) == y(j);
    }
    rep.stage1[k] = {spec.model_id, n, n_pos, static_cast<double>(correct) / n};
  });

  const auto n = static_cast<Eigen::Index>(records.size());
  const auto dims = static_cast<Eigen::Index>(config.stage1.size()) + 2;
  Eigen::MatrixXd x2(n, dims);
  Eigen::VectorXi y2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    x2.row(i) = stage2_input(model, table.features[static_cast<std::size_t>(i)], r).transpose();
    y2(i) = *r.severity_label;
  }
  ForestParams fp = config.stage2;
  fp.seed = derive_seed(seed, "stage2");
  model.stage2 = train_forest(x2, y2, fp);
  int correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    correct += predict_forest(model.stage2, x2.row(i), config.fusion, config.ties).label == y2(i);
  }
  rep.stage2_train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return model;
}

HierarchyPrediction predict_hierarchy(const HierarchyModel& model, const SpeakerRecord& record,
                                      std::span<const SpeakerFeatureVector> features) {
  HierarchyPrediction out;
  out.stage2_input = stage2_input(model, features, record, &out.stage1_probabilities);
  out.forest = predict_forest(model.stage2, out.stage2_input.transpose(), model.config.fusion, model.config.ties);
  out.label = out.forest.label;
  return out;
}

HierarchyPrediction predict_hierarchy(const HierarchyModel& model, const SpeakerRecord& record) {
  std::vector<std::string> warnings;
  const auto features = speaker_features(record, model.config.stage1, warnings);
  HierarchyPrediction out = predict_hierarchy(model, record, features);
  out.warnings = std::move(warnings);
  return out;
}

// ---------------------------------------------------------------------------

std::string serialize_hierarchy(const HierarchyModel& model) {
  if (model.stage1.size() != model.config.stage1.size()) throw Error("serialize_hierarchy: incomplete model");
  ByteWriter out;
  out.bytes(kMagic);
  out.u32(kFormatVersion);
  out.u32(static_cast<std::uint32_t>(model.stage1.size() + 2));
  const auto section = [&](SectionTag tag, const std::string& payload) {
    out.u32(tag);
    out.u64(payload.size());
    out.bytes(payload);
  };
  section(kConfigSection, format_hierarchy_config(model.config));
  for (std::size_t k = 0; k < model.stage1.size(); ++k) {
    ByteWriter w;
    w.i32(model.config.stage1[k].model_id);
    write_gbm(w, model.stage1[k]);
    section(kStageOneSection, w.data());
  }
  section(kStageTwoSection, serialize_forest(model.stage2));
  out.u64(fnv1a(out.data()));
  return out.take();
}

HierarchyModel deserialize_hierarchy(std::string_view bytes) {
  const std::string ctx = "model file";
  if (bytes.size() < kMagic.size() + 8) throw Error(ctx + ": truncated data (too short for a model)");
  if (bytes.substr(0, kMagic.size()) != kMagic) throw Error(ctx + ": not a model file (bad magic)");
  ByteReader in(bytes.substr(kMagic.size()), ctx);
  const std::uint32_t version = in.u32();
  if (version != kFormatVersion) {
    throw Error(ctx + ": unsupported format version " + std::to_string(version) + " (expected " +
                std::to_string(kFormatVersion) + ")");
  }
  // Structure first, so truncation is reported as such; then the checksum;
  // only then are payloads interpreted.
  const std::uint32_t n_sections = in.u32();
  std::vector<std::pair<std::uint32_t, std::string_view>> sections;
  for (std::uint32_t s = 0; s < n_sections; ++s) {
    const std::uint32_t tag = in.u32();
    const std::uint64_t len = in.u64();
    if (len > in.remaining()) {
      throw Error(ctx + ": truncated data (section " + std::to_string(s) + " overruns the file)");
    }
    sections.emplace_back(tag, in.bytes(static_cast<std::size_t>(len)));
  }
  if (in.remaining() < 8) throw Error(ctx + ": truncated data (missing checksum)");
  if (in.remaining() > 8) throw Error(ctx + ": corrupt data (unexpected bytes after the last section)");
  if (in.u64() != fnv1a(bytes.substr(0, bytes.size() - 8))) throw Error(ctx + ": corrupt data (checksum mismatch)");

  HierarchyModel model;
  bool have_config = false;
  bool have_stage2 = false;
  std::map<int, GbmModel> stage1;
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const auto [tag, payload] = sections[s];
    ByteReader sec(payload, ctx + " section " + std::to_string(s));
    switch (tag) {
      case kConfigSection:
        model.config = parse_hierarchy_config(payload);
        have_config = true;
        break;
      case kStageOneSection: {
        const int id = sec.i32();
        if (!stage1.emplace(id, read_gbm(sec)).second) sec.fail("duplicate stage-1 model " + std::to_string(id));
        if (!sec.done()) sec.fail("trailing bytes");
        break;
      }
      case kStageTwoSection:
        model.stage2 = read_forest(sec);
        if (!sec.done()) sec.fail("trailing bytes");
        have_stage2 = true;
        break;
      default:
        break;  // sections from newer writers are skipped
    }
  }
  if (!have_config || !have_stage2) throw Error(ctx + ": corrupt data (missing config or stage-2 section)");
  for (const auto& spec : model.config.stage1) {
    auto it = stage1.find(spec.model_id);
    if (it == stage1.end()) {
      throw Error(ctx + ": corrupt data (stage-1 model " + std::to_string(spec.model_id) + " missing)");
    }
    if (it->second.n_features != kAcousticDims) throw Error(ctx + ": corrupt data (stage-1 feature count)");
    model.stage1.push_back(std::move(it->second));
  }
  if (model.stage2.n_features != static_cast<int>(model.stage1.size()) + 2) {
    throw Error(ctx + ": corrupt data (stage-2 input dimension)");
  }
  return model;
}

void save_hierarchy(const HierarchyModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_hierarchy(model));
}

HierarchyModel load_hierarchy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize_hierarchy(buf.str());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace dys
