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

#include <fstream>

#include "dys/corpus.hpp"
#include "dys/wav.hpp"
#include "fixtures.hpp"

using namespace dys;
namespace fs = std::filesystem;
using dys::testing::scratch_dir;
using dys::testing::slurp;

namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

const char* kHeader = "speaker_id,age,gender,label,path_A,path_E,path_I,path_O,path_U,path_KA,path_PA,path_TA\n";

std::string row(const std::string& id, const std::string& age, const std::string& gender, const std::string& label,
                const std::string& wav = "a.wav") {
  std::string s = id + "," + age + "," + gender + "," + label;
  for (int i = 0; i < 8; ++i) s += "," + wav;
  return s + "\n";
}

fs::path tiny_corpus_dir(const std::string& name) {
  const fs::path dir = scratch_dir(name);
  write_wav(dir / "a.wav", dys::testing::sine_clip(220.0, 0.2, 8000));
  return dir;
}

}  // namespace

TEST_CASE("WAV round-trip keeps rate and samples to 16-bit precision") {
  const fs::path dir = scratch_dir("wav");
  AudioClip c = dys::testing::sine_clip(440.0, 0.25, 16000, 0.8);
  write_wav(dir / "x.wav", c);
  const AudioClip back = read_wav(dir / "x.wav");
  CHECK(back.sample_rate_hz == 16000);
  REQUIRE(back.size() == c.size());
  CHECK((back.samples - c.samples).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(encode_wav(c) == slurp(dir / "x.wav"));
}

TEST_CASE("WAV decoder rejects unsupported or broken files") {
  const fs::path dir = scratch_dir("wavbad");
  write_text(dir / "junk.wav", "not a wav file at all, definitely not");
  CHECK_THROWS_WITH_AS(read_wav(dir / "junk.wav"), doctest::Contains("unsupported audio encoding"), Error);
  std::string w = encode_wav(dys::testing::sine_clip(100, 0.1, 8000));
  write_text(dir / "short.wav", w.substr(0, 30));
  CHECK_THROWS_AS(read_wav(dir / "short.wav"), Error);
  // Stereo header.
  w[22] = 2;
  write_text(dir / "stereo.wav", w);
  CHECK_THROWS_WITH_AS(read_wav(dir / "stereo.wav"), doctest::Contains("channels"), Error);
  CHECK_THROWS_AS(read_wav(dir / "missing.wav"), Error);
}

TEST_CASE("manifest loads speakers and resolves relative paths") {
  const fs::path dir = tiny_corpus_dir("manifest_ok");
  write_text(dir / "m.csv", std::string(kHeader) + row("s1", "45", "F", "3") + row("s2", "70", "M", ""));
  const auto recs = load_manifest(dir / "m.csv");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].speaker_id == "s1");
  CHECK(recs[0].gender == Gender::Female);
  CHECK(recs[0].severity_label == 3);
  CHECK(recs[1].age_years == 70);
  CHECK_FALSE(recs[1].severity_label.has_value());
  CHECK(recs[1].utterances.size() == 8);
  CHECK(recs[1].clip(UtteranceKind::TA).sample_rate_hz == 8000);
}

TEST_CASE("manifest errors name the line and field") {
  const fs::path dir = tiny_corpus_dir("manifest_bad");
  auto expect = [&](const std::string& body, const std::string& needle) {
    write_text(dir / "m.csv", std::string(kHeader) + body);
    CHECK_THROWS_WITH_AS(load_manifest(dir / "m.csv"), doctest::Contains(needle.c_str()), Error);
  };
  expect(row("s1", "45", "F", "6"), "field label");
  expect(row("s1", "45", "F", "0"), "field label");
  expect(row("s1", "abc", "F", "1"), "field age");
  expect(row("s1", "45", "X", "1"), "field gender");
  expect(row("s1", "45", "F", "1", "nope.wav"), "missing file");
  expect("s1,45,F,1,a.wav\n", "expected 12 fields");
  expect(row("s1", "45", "F", "1") + row("s2", "45", "F", "x"), "row 3");

  write_text(dir / "m.csv", "id,age\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir / "m.csv"), doctest::Contains("header"), Error);
  CHECK_THROWS_AS(load_manifest(dir / "absent.csv"), Error);
}

TEST_CASE("concatenation follows the given order") {
  SpeakerRecord r;
  r.speaker_id = "x";
  for (std::size_t i = 0; i < kRecordedKinds.size(); ++i) {
    AudioClip c;
    c.sample_rate_hz = 8000;
    c.samples = Eigen::VectorXd::Constant(3, static_cast<double>(i));
    r.utterances[kRecordedKinds[i]] = c;
  }
  const AudioClip all = concat_utterances(r, kCombinedOrder);
  REQUIRE(all.size() == 24);
  // A E I O U KA TA PA: TA (index 7) precedes PA (index 6).
  CHECK(all.samples(18) == 7.0);
  CHECK(all.samples(21) == 6.0);
  r.utterances[UtteranceKind::E].sample_rate_hz = 16000;
  CHECK_THROWS_AS(concat_utterances(r, kCombinedOrder), Error);
  CHECK_THROWS_AS(r.clip(UtteranceKind::Combined), Error);
}

TEST_CASE("severity traits degrade monotonically with severity") {
  for (int c = 1; c < 5; ++c) {
    const auto worse = severity_traits(c);
    const auto better = severity_traits(c + 1);
    CHECK(worse.jitter_pct > better.jitter_pct);
    CHECK(worse.shimmer_pct > better.shimmer_pct);
    CHECK(worse.formant_instability_pct > better.formant_instability_pct);
  }
  CHECK_THROWS_AS(severity_traits(0), Error);
}

TEST_CASE("utterance synthesis is deterministic and places impulses at f0") {
  SynthesisProfile p = dys::testing::steady_voice(100.0);
  const auto a = synthesize_utterance(p, 9);
  const auto b = synthesize_utterance(p, 9);
  CHECK(a.clip.samples == b.clip.samples);
  CHECK(a.clip.size() == 8000);
  REQUIRE(a.impulse_positions.size() >= 98);
  for (std::size_t i = 1; i < a.impulse_positions.size(); ++i) {
    CHECK(a.impulse_positions[i] - a.impulse_positions[i - 1] == 80);
  }
  p.jitter_pct = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = dys::testing::steady_voice(100.0);
  p.source_tilt_hz = -5.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("synthetic corpus layout and save/load round-trip") {
  CorpusOptions opt;
  opt.vowel_duration_s = 0.3;
  opt.syllable_duration_s = 0.4;
  const auto recs = synthesize_corpus(2, 5, opt);
  REQUIRE(recs.size() == 10);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].severity_label == static_cast<int>(i / 2) + 1);
    CHECK_NOTHROW(recs[i].validate());
  }
  const auto again = synthesize_corpus(2, 5, opt);
  CHECK(again[3].clip(UtteranceKind::KA).samples == recs[3].clip(UtteranceKind::KA).samples);
  CHECK(synthesize_corpus(2, 6, opt)[3].clip(UtteranceKind::KA).samples != recs[3].clip(UtteranceKind::KA).samples);

  const fs::path dir = scratch_dir("corpus_rt");
  const fs::path manifest = save_corpus(recs, dir);
  const auto loaded = load_manifest(manifest);
  REQUIRE(loaded.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(loaded[i].speaker_id == recs[i].speaker_id);
    CHECK(loaded[i].age_years == recs[i].age_years);
    CHECK(loaded[i].gender == recs[i].gender);
    CHECK(loaded[i].severity_label == recs[i].severity_label);
    const auto& x = recs[i].clip(UtteranceKind::O).samples;
    const auto& y = loaded[i].clip(UtteranceKind::O).samples;
    CHECK((x - y).cwiseAbs().maxCoeff() < 1e-4);
  }
  // Saving is deterministic byte for byte.
  const fs::path dir2 = scratch_dir("corpus_rt2");
  save_corpus(recs, dir2);
  CHECK(slurp(dir / "manifest.csv") == slurp(dir2 / "manifest.csv"));
}

TEST_CASE("speaker validation") {
  SpeakerRecord r;
  r.speaker_id = "s";
  r.age_years = 40;
  CHECK_THROWS_WITH_AS(r.validate(), doctest::Contains("expected 8 utterances"), Error);
  AudioClip empty;
  CHECK_THROWS_AS(empty.validate(), Error);
  AudioClip nan_clip = dys::testing::sine_clip(100, 0.01, 8000);
  nan_clip.samples(3) = std::nan("");
  CHECK_THROWS_AS(nan_clip.validate(), Error);
}
