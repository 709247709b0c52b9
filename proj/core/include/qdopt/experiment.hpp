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

#ifndef QDOPT_EXPERIMENT_HPP_
#define QDOPT_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdopt/archive.hpp"
#include "qdopt/optimizers.hpp"
#include "qdopt/problems.hpp"

namespace qdopt {

/// Config validation failure with a field-level message.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  std::string kind;  // toy_cells | synthetic | tabular | tabular_csv
  int dims = 3;      // synthetic
  int modes = 5;     // synthetic
  std::string path;  // tabular variants
  std::string space_json;  // tabular_csv
  double penalty = 100.0;  // tabular_csv
};

struct NicheSpec {
  std::vector<double> percentiles;  // percentile niches over the feature
  int grid = 0;                     // synthetic grid niches
  std::string explicit_json;        // verbatim niche set
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSpec problem;
  NicheSpec niches;
  std::string optimizer;
  std::optional<int> budget_full_evals;
  std::optional<double> budget_units;
  int replications = 1;
  std::uint64_t base_seed = 0;
  int constraint_niche = 0;  // 1-based id, regularized_evolution only
  OptimizerConfig params;
};

/// Known optimizer names, in report order.
const std::vector<std::string>& optimizer_names();

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// The config with every default materialized, as canonical JSON (stored in
/// trace headers for provenance).
std::string materialized_config_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

Problem build_problem(const ProblemSpec& spec);
NicheSet build_niches(const ExperimentConfig& config, const Problem& problem);

/// Total budget in fidelity units (full_evals times the reference fidelity,
/// or the explicit unit budget).
double resolve_budget_units(const ExperimentConfig& config,
                            const Problem& problem);

/// Runs one replication end to end (no files); used by tests and the
/// runner. Replication seeds derive as base_seed + replication.
Archive run_replication(const ExperimentConfig& config, const Problem& problem,
                        const NicheSet& niches, int replication,
                        const EvalSink& sink = {});

struct RunSummary {
  std::vector<std::string> trace_paths;  // one per replication, in order
  int executed = 0;
  int skipped = 0;  // complete traces found under --resume
};

/// Runs all replications, one JSON-lines trace per replication under
/// out_dir. With resume, completed traces are kept; partial ones are redone.
/// Replications run on `parallel` worker threads (1 = sequential).
RunSummary run_experiment(const ExperimentConfig& config,
                          const std::string& out_dir, bool resume = false,
                          int parallel = 1);

/// Brute-force oracle persisted as JSON (per-niche optimum or empty).
void write_oracle_file(const ExperimentConfig& config,
                       const std::string& path);

struct ReportOptions {
  /// Log-transform feature values before the hypervolume-indicator table
  /// (useful when features span orders of magnitude, e.g. parameter
  /// counts). Requires strictly positive features.
  bool log_features = false;
};

/// Report tables over a set of trace files, grouped by (problem, optimizer):
/// anytime curves, final values, ranks, ERT ratios, niche-miss rates,
/// per-niche bests and hypervolume indicators. Byte-deterministic in the
/// input traces.
void write_reports(const std::vector<std::string>& trace_paths,
                   const std::string& out_dir,
                   const ReportOptions& options = {});

/// All *.jsonl files under a directory, sorted.
std::vector<std::string> find_trace_files(const std::string& dir);

}  // namespace qdopt

#endif  // QDOPT_EXPERIMENT_HPP_
