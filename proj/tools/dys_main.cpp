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

// dys: synthesize, extract, train, predict, evaluate.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.
// Log level comes from DYS_LOG (trace|debug|info|warn|error|off; default warn).

#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dys/cli.hpp"

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("dys");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("DYS_LOG")) spdlog::set_level(spdlog::level::from_str(level));

  CLI::App app{"Dysarthria severity classification"};
  app.require_subcommand(1);

  dys::RunConfig run;
  std::string config_path, fusion, ties, feature_set = "both";
  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", run.seed, "Random seed")->default_val(0); };
  auto add_policies = [&](CLI::App* c) {
    c->add_option("--config", config_path, "Hierarchy configuration table");
    c->add_option("--fusion", fusion, "Stage-2 fusion: majority|soft");
    c->add_option("--tie-policy", ties, "Tie breaking: severe|least-severe");
  };

  auto* synth = app.add_subcommand("synth", "Write a synthetic labelled corpus");
  synth->add_option("--n-per-class", run.n_per_class, "Speakers per severity class")->required();
  synth->add_option("--out", run.out, "Output directory")->required();
  add_seed(synth);

  auto* extract = app.add_subcommand("extract", "Write per-speaker feature tables");
  extract->add_option("--manifest", run.manifest, "Corpus manifest")->required();
  extract->add_option("--out", run.out, "Output directory")->required();
  extract->add_option("--feature-set", feature_set, "acoustic12|phase54|both");
  add_policies(extract);

  auto* train = app.add_subcommand("train", "Train the two-stage classifier");
  train->add_option("--manifest", run.manifest, "Labelled corpus manifest")->required();
  train->add_option("--model", run.model, "Model file to write")->required();
  add_seed(train);
  add_policies(train);

  auto* predict = app.add_subcommand("predict", "Predict severity labels");
  predict->add_option("--manifest", run.manifest, "Corpus manifest")->required();
  predict->add_option("--model", run.model, "Trained model file")->required();
  predict->add_option("--out,--predictions", run.predictions, "Predictions CSV to write")->required();
  predict->add_option("--fusion", fusion, "Override stage-2 fusion: majority|soft");
  predict->add_option("--tie-policy", ties, "Override tie breaking: severe|least-severe");

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against manifest labels");
  evaluate->add_option("--predictions", run.predictions, "Predictions CSV")->required();
  evaluate->add_option("--manifest", run.manifest, "Labelled corpus manifest")->required();
  evaluate->add_option("--out", run.out, "Text report (a .kv report is written beside it)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) run.config = config_path;
    if (!fusion.empty()) {
      try {
        run.fusion = dys::parse_fusion_policy(fusion);
      } catch (const dys::Error& e) {
        throw dys::UsageError(e.what());
      }
    }
    if (!ties.empty()) {
      try {
        run.ties = dys::parse_tie_policy(ties);
      } catch (const dys::Error& e) {
        throw dys::UsageError(e.what());
      }
    }
    run.feature_set = dys::parse_feature_set(feature_set);

    if (*synth) {
      std::printf("%s\n", dys::cmd_synth(run).string().c_str());
    } else if (*extract) {
      const auto s = dys::cmd_extract(run);
      std::printf("acoustic rows %d, phase rows %d, warnings %zu\n", s.acoustic_rows, s.phase_rows,
                  s.warnings.size());
    } else if (*train) {
      dys::cmd_train(run);
    } else if (*predict) {
      dys::cmd_predict(run);
    } else if (*evaluate) {
      dys::cmd_evaluate(run);
    }
  } catch (const dys::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
