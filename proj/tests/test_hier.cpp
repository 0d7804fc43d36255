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

#include <cstring>

#include "dys/hier.hpp"
#include "fixtures.hpp"

using namespace dys;
namespace fs = std::filesystem;

namespace {

CorpusOptions short_clips() {
  CorpusOptions o;
  o.vowel_duration_s = 0.6;
  o.syllable_duration_s = 0.6;
  return o;
}

// Three speakers per class covers every subgroup of the default table.
const std::vector<SpeakerRecord>& small_corpus() {
  static const std::vector<SpeakerRecord> records = synthesize_corpus(3, 21, short_clips());
  return records;
}

const HierarchyModel& small_model() {
  static const HierarchyModel model = [] {
    HierarchyConfig c;
    for (auto& s : c.stage1) s.n_estimators = 20;
    c.stage2.n_trees = 15;
    return train_hierarchy(small_corpus(), c, 5);
  }();
  return model;
}

}  // namespace

TEST_CASE("default stage-1 table") {
  using K = UtteranceKind;
  using G = SubgroupKey;
  using S = Segment;
  struct Row {
    int id;
    G group;
    std::vector<int> pos, neg;
    K sound;
    int n_est;
    double frame_ms;
    S seg;
  };
  const std::vector<Row> expected = {
      {1, G::Female, {3}, {4, 5}, K::A, 200, 100, S::Full},
      {2, G::Female, {4}, {5}, K::KA, 100, 100, S::Initial20s},
      {3, G::MaleUnder60, {3}, {4, 5}, K::U, 100, 50, S::Later10s},
      {4, G::MaleUnder60, {4}, {5}, K::O, 100, 500, S::Full},
      {5, G::MaleOver60, {3}, {4, 5}, K::E, 200, 100, S::Initial20s},
      {6, G::MaleOver60, {4}, {5}, K::I, 100, 100, S::Initial20s},
      {7, G::All, {1}, {2}, K::I, 100, 50, S::Full},
      {8, G::All, {1}, {2}, K::U, 100, 50, S::Full},
  };
  const auto cfg = default_hierarchy_config();
  REQUIRE(cfg.size() == expected.size());
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    CAPTURE(i);
    CHECK(cfg[i].model_id == expected[i].id);
    CHECK(cfg[i].subgroup == expected[i].group);
    CHECK(cfg[i].positive_classes == expected[i].pos);
    CHECK(cfg[i].negative_classes == expected[i].neg);
    CHECK(cfg[i].sound_category == expected[i].sound);
    CHECK(cfg[i].n_estimators == expected[i].n_est);
    CHECK(cfg[i].frame_len_ms == expected[i].frame_ms);
    CHECK(cfg[i].segment == expected[i].seg);
  }
  const HierarchyConfig c;
  CHECK(c.learning_rate == 0.01);
  CHECK(c.stage2.n_trees == 100);
  CHECK(c.stage2.max_depth == 5);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("demographic encodings") {
  CHECK(encode_gender(Gender::Female) == 0.9);
  CHECK(encode_gender(Gender::Male) == 0.1);
  CHECK(normalize_age(45) == 0.45);
  CHECK(normalize_age(100) == 1.0);
  CHECK(normalize_age(130) == 1.0);
  CHECK(normalize_age(0) == 0.0);
  CHECK(in_subgroup(SubgroupKey::MaleUnder60, Gender::Male, 59));
  CHECK_FALSE(in_subgroup(SubgroupKey::MaleUnder60, Gender::Male, 60));
  CHECK(in_subgroup(SubgroupKey::MaleOver60, Gender::Male, 60));
  CHECK_FALSE(in_subgroup(SubgroupKey::MaleOver60, Gender::Female, 70));
  CHECK(in_subgroup(SubgroupKey::Female, Gender::Female, 20));
  CHECK(in_subgroup(SubgroupKey::All, Gender::Male, 20));
}

TEST_CASE("table tokens round-trip") {
  for (auto k : {SubgroupKey::Female, SubgroupKey::MaleUnder60, SubgroupKey::MaleOver60, SubgroupKey::All}) {
    CHECK(parse_subgroup(to_string(k)) == k);
  }
  CHECK(to_string(SubgroupKey::MaleOver60) == "M>=60");
  for (auto s : {Segment::Full, Segment::Initial20s, Segment::Later10s}) CHECK(parse_segment(to_string(s)) == s);
  CHECK_THROWS_AS(parse_subgroup("X"), Error);
  CHECK_THROWS_AS(parse_segment("Middle"), Error);
}

TEST_CASE("segment selection") {
  const AudioClip c = dys::testing::sine_clip(100.0, 35.0, 1000);
  bool fell = true;
  CHECK(apply_segment(c, Segment::Full, &fell).size() == 35000);
  CHECK_FALSE(fell);
  const AudioClip initial = apply_segment(c, Segment::Initial20s, &fell);
  CHECK(initial.size() == 20000);
  CHECK(initial.samples(5) == c.samples(5));
  const AudioClip later = apply_segment(c, Segment::Later10s, &fell);
  CHECK(later.size() == 10000);
  CHECK(later.samples(0) == c.samples(20000));
  CHECK_FALSE(fell);
  // Short clips: Initial takes everything, Later falls back to Full.
  const AudioClip s = dys::testing::sine_clip(100.0, 3.0, 1000);
  CHECK(apply_segment(s, Segment::Initial20s, &fell).size() == 3000);
  CHECK_FALSE(fell);
  CHECK(apply_segment(s, Segment::Later10s, &fell).size() == 3000);
  CHECK(fell);
  // A partial later segment is kept as is.
  CHECK(apply_segment(dys::testing::sine_clip(100.0, 25.0, 1000), Segment::Later10s).size() == 5000);
}

TEST_CASE("stage-1 spec validation") {
  StageOneSpec s = default_hierarchy_config()[0];
  CHECK_NOTHROW(s.validate());
  s.sound_category = UtteranceKind::PA;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("model 1"), Error);
  s = default_hierarchy_config()[0];
  s.negative_classes = {3, 4};
  CHECK_THROWS_AS(s.validate(), Error);
  s = default_hierarchy_config()[0];
  s.positive_classes = {6};
  CHECK_THROWS_AS(s.validate(), Error);
  s = default_hierarchy_config()[0];
  s.frame_len_ms = 0.0;
  CHECK_THROWS_AS(s.validate(), Error);
  HierarchyConfig c;
  c.stage1.push_back(c.stage1[0]);
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("duplicate"), Error);
}

TEST_CASE("configuration text round-trip") {
  HierarchyConfig c;
  c.learning_rate = 0.05;
  c.stage2.n_trees = 7;
  c.evaluate_out_of_group = false;
  c.fusion = FusionPolicy::Soft;
  c.ties = TiePolicy::LeastSevere;
  c.stage1[2].frame_len_ms = 75.0;
  const std::string text = format_hierarchy_config(c);
  CHECK(text.find("1,F,3,4;5,A,200,100,Full") != std::string::npos);
  const HierarchyConfig back = parse_hierarchy_config(text);
  CHECK(back.stage1 == c.stage1);
  CHECK(back.learning_rate == 0.05);
  CHECK(back.stage2.n_trees == 7);
  CHECK_FALSE(back.evaluate_out_of_group);
  CHECK(back.fusion == FusionPolicy::Soft);
  CHECK(back.ties == TiePolicy::LeastSevere);
  CHECK(format_hierarchy_config(back) == text);

  const fs::path dir = dys::testing::scratch_dir("config");
  save_hierarchy_config(c, dir / "h.cfg");
  CHECK(load_hierarchy_config(dir / "h.cfg").stage1 == c.stage1);
}

TEST_CASE("configuration parse errors are specific") {
  const std::string header = "model_id,subgroup,positive,negative,sound,n_estimators,frame_ms,segment\n";
  CHECK_THROWS_WITH_AS(parse_hierarchy_config(header + "1,F,3,4;5,PA,200,100,Full\n"),
                       doctest::Contains("PA"), Error);
  CHECK_THROWS_AS(parse_hierarchy_config(header + "1,Q,3,4;5,A,200,100,Full\n"), Error);
  CHECK_THROWS_AS(parse_hierarchy_config(header + "1,F,3,4;5,A,200,100\n"), Error);
  CHECK_THROWS_AS(parse_hierarchy_config("bogus_key=1\n" + header + "1,F,3,4;5,A,200,100,Full\n"), Error);
  CHECK_THROWS_AS(parse_hierarchy_config("learning_rate=2\n" + header + "1,F,3,4;5,A,200,100,Full\n"), Error);
  CHECK_THROWS_AS(parse_hierarchy_config(header), Error);
  // Comments and blank lines are fine.
  const HierarchyConfig ok = parse_hierarchy_config("# mine\n\n" + header + "1,F,3,4;5,A,200,100,Full\n");
  CHECK(ok.stage1.size() == 1);
}

TEST_CASE("feature vector layout") {
  const SpeakerRecord& r = small_corpus()[0];
  const StageOneSpec spec = default_hierarchy_config()[0];
  const SpeakerFeatureVector f = build_feature_vector(r, spec);
  const auto v = f.to_vector();
  CHECK(v.size() == 14);
  CHECK(v.allFinite());
  CHECK(v(12) == f.age_norm);
  CHECK(v(13) == f.gender_code);
  CHECK(v.head(5) == Eigen::Map<const Eigen::Matrix<double, 5, 1>>(f.formants_hz.data()));
  CHECK(SpeakerFeatureVector::acoustic_names().size() == 12);
  CHECK(f.formants_hz[0] > 0.0);
  CHECK(f.glottal.mean_period_ms > 0.0);

  // The table agrees with per-speaker extraction.
  const auto specs = default_hierarchy_config();
  const std::vector<SpeakerRecord> one(small_corpus().begin(), small_corpus().begin() + 1);
  const FeatureTable t = extract_feature_table(one, specs);
  CHECK(t.features[0][0].acoustic() == f.acoustic());
}

TEST_CASE("trained hierarchy: shape, determinism and persistence") {
  const HierarchyModel& m = small_model();
  CHECK(m.stage1.size() == 8);
  CHECK(m.stage2.n_features == 10);
  CHECK(m.stage2.trees.size() == 15);

  HierarchyConfig c = m.config;
  const std::string bytes = serialize_hierarchy(m);
  CHECK(bytes == serialize_hierarchy(train_hierarchy(small_corpus(), c, 5)));
  CHECK(bytes.substr(0, 8) == "DYSMODEL");

  const HierarchyModel back = deserialize_hierarchy(bytes);
  CHECK(serialize_hierarchy(back) == bytes);
  for (const auto& r : small_corpus()) {
    const HierarchyPrediction a = predict_hierarchy(m, r);
    const HierarchyPrediction b = predict_hierarchy(back, r);
    CHECK(a.label == b.label);
    CHECK(a.stage1_probabilities == b.stage1_probabilities);
    CHECK(valid_label(a.label));
    CHECK(a.stage2_input.size() == 10);
  }

  const fs::path dir = dys::testing::scratch_dir("model");
  save_hierarchy(m, dir / "m.bin");
  CHECK(dys::testing::slurp(dir / "m.bin") == bytes);
  CHECK(serialize_hierarchy(load_hierarchy(dir / "m.bin")) == bytes);
}

TEST_CASE("damaged model files are rejected") {
  const std::string bytes = serialize_hierarchy(small_model());
  CHECK_THROWS_AS(deserialize_hierarchy(bytes.substr(0, bytes.size() / 2)), Error);
  CHECK_THROWS_AS(deserialize_hierarchy(bytes.substr(0, 6)), Error);
  std::string flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x10;
  CHECK_THROWS_WITH_AS(deserialize_hierarchy(flipped), doctest::Contains("checksum"), Error);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_hierarchy(magic), Error);
  std::string version = bytes;
  version[8] = 99;
  CHECK_THROWS_AS(deserialize_hierarchy(version), Error);
  CHECK_THROWS_AS(load_hierarchy("/nonexistent/model.bin"), Error);
}

TEST_CASE("out-of-group stage-1 inputs can be neutralized") {
  HierarchyModel m = small_model();
  m.config.evaluate_out_of_group = false;
  for (const auto& r : small_corpus()) {
    const HierarchyPrediction p = predict_hierarchy(m, r);
    for (std::size_t k = 0; k < m.config.stage1.size(); ++k) {
      if (!in_subgroup(m.config.stage1[k].subgroup, r.gender, r.age_years)) CHECK(p.stage2_input(k) == 0.5);
    }
    CHECK(p.stage2_input(8) == normalize_age(r.age_years));
    CHECK(p.stage2_input(9) == encode_gender(r.gender));
  }
}

TEST_CASE("training needs every class and labelled speakers") {
  std::vector<SpeakerRecord> partial(small_corpus().begin(), small_corpus().begin() + 12);  // classes 1..4
  CHECK_THROWS_WITH_AS(train_hierarchy(partial, HierarchyConfig{}, 1), doctest::Contains("class 5"), Error);
  std::vector<SpeakerRecord> unlabeled = small_corpus();
  unlabeled[0].severity_label.reset();
  CHECK_THROWS_AS(train_hierarchy(unlabeled, HierarchyConfig{}, 1), Error);
}
