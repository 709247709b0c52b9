// Copyright 2026 The qdopt Authors.
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

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "qdopt/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quality-diversity black-box optimization experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string trace_dir;
  std::string oracle_path;
  int replications_override = -1;
  long long seed_override = -1;
  int parallel = 1;
  bool resume = false;
  bool log_features = false;

  CLI::App* run = app.add_subcommand("run", "Run seeded replications of an experiment");
  run->add_option("--config", config_path, "Experiment config file (JSON)")->required();
  run->add_option("--out-dir", out_dir, "Output directory for trace files");
  run->add_option("--replications", replications_override, "Override the config's replication count");
  run->add_option("--seed", seed_override, "Override the config's base seed");
  run->add_option("--parallel", parallel, "Worker threads over replications");
  run->add_flag("--resume", resume, "Skip replications whose trace is complete");

  CLI::App* oracle = app.add_subcommand("oracle", "Brute-force per-niche optima of an enumerable problem");
  oracle->add_option("--config", config_path, "Experiment config file (JSON)")->required();
  oracle->add_option("--out", oracle_path, "Oracle output file")->required();

  CLI::App* report = app.add_subcommand("report", "Aggregate traces into CSV report tables");
  report->add_option("--traces", trace_dir, "Directory of .jsonl trace files")->required();
  report->add_option("--out-dir", out_dir, "Output directory for CSV tables");
  report->add_flag("--log-features", log_features,
                   "Log-transform features for the hypervolume table");

  CLI::App* validate = app.add_subcommand("validate-config", "Check an experiment config and exit");
  validate->add_option("--config", config_path, "Experiment config file (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) {
      qdopt::load_experiment_config(config_path);
      std::printf("ok: %s\n", config_path.c_str());
      return 0;
    }
    if (app.got_subcommand(oracle)) {
      const auto config = qdopt::load_experiment_config(config_path);
      qdopt::write_oracle_file(config, oracle_path);
      std::printf("oracle written to %s\n", oracle_path.c_str());
      return 0;
    }
    if (app.got_subcommand(run)) {
      auto config = qdopt::load_experiment_config(config_path);
      if (replications_override > 0) config.replications = replications_override;
      if (seed_override >= 0) {
        config.base_seed = static_cast<std::uint64_t>(seed_override);
      }
      const auto summary = qdopt::run_experiment(config, out_dir, resume, parallel);
      std::printf("ran %d replication(s), skipped %d (complete), traces in %s\n",
                  summary.executed, summary.skipped, out_dir.c_str());
      return 0;
    }
    if (app.got_subcommand(report)) {
      const auto paths = qdopt::find_trace_files(trace_dir);
      if (paths.empty()) {
        std::fprintf(stderr, "no .jsonl traces found in %s\n", trace_dir.c_str());
        return 1;
      }
      qdopt::ReportOptions options;
      options.log_features = log_features;
      qdopt::write_reports(paths, out_dir, options);
      std::printf("reports for %zu trace(s) written to %s\n", paths.size(),
                  out_dir.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
