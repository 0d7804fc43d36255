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

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

#include "dys/cli.hpp"
#include "dys/wav.hpp"
#include "fixtures.hpp"

using namespace dys;
namespace fs = std::filesystem;
using dys::testing::scratch_dir;
using dys::testing::slurp;

namespace {

int run_tool(const std::string& args) {
  const std::string cmd = std::string(DYS_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

// A labelled manifest of 5 speakers sharing one short clip.
fs::path tiny_manifest(const fs::path& dir) {
  write_wav(dir / "a.wav", dys::testing::sine_clip(150.0, 0.3, 8000));
  std::string s = "speaker_id,age,gender,label,path_A,path_E,path_I,path_O,path_U,path_KA,path_PA,path_TA\n";
  for (int c = 1; c <= 5; ++c) {
    s += "s" + std::to_string(c) + ",50,F," + std::to_string(c);
    for (int i = 0; i < 8; ++i) s += ",a.wav";
    s += "\n";
  }
  write_text(dir / "manifest.csv", s);
  return dir / "manifest.csv";
}

}  // namespace

TEST_CASE("feature-set names") {
  CHECK(parse_feature_set("acoustic12") == FeatureSet::Acoustic12);
  CHECK(parse_feature_set("phase54") == FeatureSet::Phase54);
  CHECK(parse_feature_set("both") == FeatureSet::Both);
  CHECK_THROWS_AS(parse_feature_set("all"), UsageError);
  CHECK(kv_report_path("out/report.txt") == fs::path("out/report.kv"));
}

TEST_CASE("commands validate their arguments before working") {
  RunConfig run;
  run.out = scratch_dir("cli_usage");
  run.n_per_class = 0;
  CHECK_THROWS_AS(cmd_synth(run), UsageError);
  run.manifest = "/nonexistent/manifest.csv";
  CHECK_THROWS_WITH_AS(cmd_extract(run), doctest::Contains("manifest"), UsageError);
  run.model = run.out / "m.bin";
  CHECK_THROWS_AS(cmd_train(run), UsageError);
  run.manifest = tiny_manifest(run.out);
  run.model = "/nonexistent/dir/m.bin";
  CHECK_THROWS_WITH_AS(cmd_train(run), doctest::Contains("directory"), UsageError);
  run.predictions = run.out / "p.csv";
  CHECK_THROWS_AS(cmd_predict(run), UsageError);
}

TEST_CASE("evaluate scores a predictions file") {
  const fs::path dir = scratch_dir("cli_eval");
  RunConfig run;
  run.manifest = tiny_manifest(dir);
  run.predictions = dir / "p.csv";
  run.out = dir / "report.txt";
  write_text(run.predictions, "speaker_id,predicted_label\ns1,1\ns2,2\ns3,3\ns4,5\ns5,5\n");
  const MetricsReport r = cmd_evaluate(run);
  CHECK(r.correct == 4);
  CHECK(r.total == 5);
  CHECK(r.macro_f1 == doctest::Approx((1.0 + 1.0 + 1.0 + 0.0 + 2.0 / 3.0) / 5.0));
  CHECK(fs::exists(dir / "report.kv"));
  CHECK(slurp(dir / "report.kv").find("correct=4\n") != std::string::npos);
}

TEST_CASE("evaluate rejects mismatched predictions") {
  const fs::path dir = scratch_dir("cli_eval_bad");
  RunConfig run;
  run.manifest = tiny_manifest(dir);
  run.predictions = dir / "p.csv";
  run.out = dir / "report.txt";
  write_text(run.predictions, "speaker_id,predicted_label\ns1,1\nghost,2\n");
  CHECK_THROWS_WITH_AS(cmd_evaluate(run), doctest::Contains("ghost"), Error);
  write_text(run.predictions, "speaker_id,predicted_label\ns1,1\ns1,2\n");
  CHECK_THROWS_WITH_AS(cmd_evaluate(run), doctest::Contains("twice"), Error);
  write_text(run.predictions, "speaker_id,predicted_label\ns1,x\n");
  CHECK_THROWS_AS(cmd_evaluate(run), Error);
  write_text(run.predictions, "nonsense\n");
  CHECK_THROWS_AS(cmd_evaluate(run), Error);
  CHECK_FALSE(fs::exists(run.out));
}

TEST_CASE("extract writes feature tables and a report") {
  const fs::path dir = scratch_dir("cli_extract");
  RunConfig run;
  CorpusOptions opt;
  opt.vowel_duration_s = 0.6;
  opt.syllable_duration_s = 0.6;
  run.manifest = save_corpus(synthesize_corpus(1, 3, opt), dir / "corpus");
  run.out = dir / "features";
  const ExtractSummary s = cmd_extract(run);
  // Seven distinct (sound, frame, segment) triples in the default table.
  CHECK(s.acoustic_rows + static_cast<int>(s.warnings.size()) >= 5 * 7);
  const std::string acoustic = slurp(run.out / "acoustic12.csv");
  CHECK(acoustic.rfind("speaker_id,age,gender,label,sound,frame_ms,segment,F1", 0) == 0);
  const std::string phase = slurp(run.out / "phase54.csv");
  CHECK(phase.rfind("speaker_id,utterance,frame,pcc_0", 0) == 0);
  CHECK(phase.find(",Combined,") != std::string::npos);
  CHECK(s.phase_rows > 0);
  const std::string report = slurp(run.out / "extract_report.txt");
  CHECK(report.find("warnings=" + std::to_string(s.warnings.size())) != std::string::npos);

  // Rerunning gives the same bytes.
  cmd_extract(run);
  CHECK(slurp(run.out / "acoustic12.csv") == acoustic);
}

TEST_CASE("tool exit codes") {
  const fs::path dir = scratch_dir("cli_exit");
  CHECK(run_tool("--help") == 0);
  CHECK(run_tool("") == 2);
  CHECK(run_tool("frobnicate") == 2);
  CHECK(run_tool("synth --out " + dir.string()) == 2);  // missing --n-per-class
  CHECK(run_tool("synth --n-per-class 0 --out " + dir.string()) == 2);
  CHECK(run_tool("train --manifest /nonexistent.csv --model " + (dir / "m.bin").string()) == 2);
  CHECK(run_tool("extract --manifest x --out y --feature-set nope") == 2);
  CHECK(run_tool("train --manifest x --model y --fusion loud") == 2);
  // Malformed manifest is a runtime error.
  write_text(dir / "bad.csv", "speaker_id\n");
  CHECK(run_tool("train --manifest " + (dir / "bad.csv").string() + " --model " + (dir / "m.bin").string()) == 1);
}
