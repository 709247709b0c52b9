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

#include "qdopt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "json_detail.hpp"
#include "qdopt/metrics.hpp"
#include "qdopt/multifidelity.hpp"
#include "qdopt/trace.hpp"

namespace qdopt {

namespace {

namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_g17(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

const nlohmann::json& require(const nlohmann::json& j, const std::string& field,
                              const char* context) {
  if (!j.contains(field)) {
    throw ConfigError(std::string(context) + ": missing field '" + field + "'");
  }
  return j.at(field);
}

template <typename T>
T get_field(const nlohmann::json& j, const std::string& field,
            const char* context) {
  try {
    return require(j, field, context).get<T>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(std::string(context) + ": field '" + field +
                      "' has the wrong type");
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& field, T fallback,
         const char* context) {
  if (!j.contains(field)) return fallback;
  return get_field<T>(j, field, context);
}

}  // namespace

const std::vector<std::string>& optimizer_names() {
  static const std::vector<std::string> names = {
      "random_search", "bop_elites_star", "parego_star",
      "map_elites",    "regularized_evolution",
      "qd_hyperband",  "bop_elites_hb",
      "mo_hyperband",  "parego_hb",
  };
  return names;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  ExperimentConfig config;
  config.name = get_or<std::string>(j, "name", "experiment", "config");

  const auto& pj = require(j, "problem", "config");
  config.problem.kind = get_field<std::string>(pj, "kind", "config.problem");
  if (config.problem.kind == "synthetic") {
    config.problem.dims = get_or<int>(pj, "dims", 3, "config.problem");
    config.problem.modes = get_or<int>(pj, "modes", 5, "config.problem");
  } else if (config.problem.kind == "tabular") {
    config.problem.path = get_field<std::string>(pj, "path", "config.problem");
  } else if (config.problem.kind == "tabular_csv") {
    config.problem.path = get_field<std::string>(pj, "path", "config.problem");
    config.problem.space_json =
        require(pj, "space", "config.problem").dump();
    config.problem.penalty =
        get_or<double>(pj, "penalty", 100.0, "config.problem");
  } else if (config.problem.kind != "toy_cells") {
    throw ConfigError("config.problem: unknown kind '" + config.problem.kind +
                      "' (expected toy_cells, synthetic, tabular or "
                      "tabular_csv)");
  }

  const auto& nj = require(j, "niches", "config");
  if (nj.contains("percentiles")) {
    config.niches.percentiles =
        get_field<std::vector<double>>(nj, "percentiles", "config.niches");
  } else if (nj.contains("grid")) {
    config.niches.grid = get_field<int>(nj, "grid", "config.niches");
  } else if (nj.contains("explicit")) {
    config.niches.explicit_json = nj.at("explicit").dump();
  } else {
    throw ConfigError(
        "config.niches: expected one of 'percentiles', 'grid' or 'explicit'");
  }

  config.optimizer = get_field<std::string>(j, "optimizer", "config");
  const auto& names = optimizer_names();
  if (std::find(names.begin(), names.end(), config.optimizer) == names.end()) {
    throw ConfigError("config: unknown optimizer '" + config.optimizer + "'");
  }

  const auto& bj = require(j, "budget", "config");
  if (bj.contains("full_evals")) {
    config.budget_full_evals = get_field<int>(bj, "full_evals", "config.budget");
    if (*config.budget_full_evals < 1) {
      throw ConfigError("config.budget: full_evals must be positive");
    }
  } else if (bj.contains("units")) {
    config.budget_units = get_field<double>(bj, "units", "config.budget");
    if (!(*config.budget_units > 0)) {
      throw ConfigError("config.budget: units must be positive");
    }
  } else {
    throw ConfigError("config.budget: expected 'full_evals' or 'units'");
  }

  config.replications = get_or<int>(j, "replications", 1, "config");
  if (config.replications < 1) {
    throw ConfigError("config: replications must be positive");
  }
  config.base_seed = get_or<std::uint64_t>(j, "seed", 0, "config");
  config.constraint_niche = get_or<int>(j, "constraint_niche", 0, "config");
  if (config.optimizer == "regularized_evolution" &&
      config.constraint_niche < 1) {
    throw ConfigError(
        "config: regularized_evolution needs 'constraint_niche' (1-based "
        "niche id)");
  }

  if (j.contains("optimizer_params")) {
    const auto& oj = j.at("optimizer_params");
    const char* ctx = "config.optimizer_params";
    config.params.initial_design =
        get_or<int>(oj, "initial_design", 10, ctx);
    config.params.n_candidates = get_or<int>(oj, "n_candidates", 100, ctx);
    config.params.rho = get_or<double>(oj, "rho", 0.0, ctx);
    config.params.parego_gamma = get_or<double>(oj, "parego_gamma", 0.05, ctx);
    config.params.parego_s = get_or<int>(oj, "parego_s", 0, ctx);
    config.params.population = get_or<int>(oj, "population", 100, ctx);
    config.params.mutation_prob = get_or<double>(oj, "mutation_prob", 0.1, ctx);
    config.params.mutation_ratio =
        get_or<double>(oj, "mutation_ratio", 0.5, ctx);
    config.params.parent_ratio = get_or<double>(oj, "parent_ratio", 0.25, ctx);
    config.params.eta = get_or<double>(oj, "eta", 3.0, ctx);
    config.params.hb_sequential =
        get_or<bool>(oj, "hb_sequential", false, ctx);
    if (oj.contains("forest")) {
      const auto& fj = oj.at("forest");
      config.params.forest.n_trees = get_or<int>(fj, "trees", 100, ctx);
      config.params.forest.max_depth = get_or<int>(fj, "max_depth", 0, ctx);
      config.params.forest.min_leaf = get_or<int>(fj, "min_leaf", 1, ctx);
      config.params.forest.split_candidates =
          get_or<int>(fj, "split_candidates", 0, ctx);
    }
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string materialized_config_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["name"] = config.name;
  nlohmann::json pj;
  pj["kind"] = config.problem.kind;
  if (config.problem.kind == "synthetic") {
    pj["dims"] = config.problem.dims;
    pj["modes"] = config.problem.modes;
  } else if (config.problem.kind == "tabular") {
    pj["path"] = config.problem.path;
  } else if (config.problem.kind == "tabular_csv") {
    pj["path"] = config.problem.path;
    pj["space"] = nlohmann::json::parse(config.problem.space_json);
    pj["penalty"] = config.problem.penalty;
  }
  j["problem"] = std::move(pj);
  nlohmann::json nj;
  if (!config.niches.percentiles.empty()) {
    nj["percentiles"] = config.niches.percentiles;
  } else if (config.niches.grid > 0) {
    nj["grid"] = config.niches.grid;
  } else {
    nj["explicit"] = nlohmann::json::parse(config.niches.explicit_json);
  }
  j["niches"] = std::move(nj);
  j["optimizer"] = config.optimizer;
  nlohmann::json bj;
  if (config.budget_full_evals) {
    bj["full_evals"] = *config.budget_full_evals;
  } else {
    bj["units"] = *config.budget_units;
  }
  j["budget"] = std::move(bj);
  j["replications"] = config.replications;
  j["seed"] = config.base_seed;
  if (config.constraint_niche > 0) {
    j["constraint_niche"] = config.constraint_niche;
  }
  nlohmann::json oj;
  oj["initial_design"] = config.params.initial_design;
  oj["n_candidates"] = config.params.n_candidates;
  oj["rho"] = config.params.rho;
  oj["parego_gamma"] = config.params.parego_gamma;
  oj["parego_s"] = config.params.parego_s;
  oj["population"] = config.params.population;
  oj["mutation_prob"] = config.params.mutation_prob;
  oj["mutation_ratio"] = config.params.mutation_ratio;
  oj["parent_ratio"] = config.params.parent_ratio;
  oj["eta"] = config.params.eta;
  oj["hb_sequential"] = config.params.hb_sequential;
  nlohmann::json fj;
  fj["trees"] = config.params.forest.n_trees;
  fj["max_depth"] = config.params.forest.max_depth;
  fj["min_leaf"] = config.params.forest.min_leaf;
  fj["split_candidates"] = config.params.forest.split_candidates;
  oj["forest"] = std::move(fj);
  j["optimizer_params"] = std::move(oj);
  return j.dump();
}

std::string config_hash(const ExperimentConfig& config) {
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "%016" PRIx64,
                fnv1a(materialized_config_json(config)));
  return buffer;
}

// ---------------------------------------------------------------------------
// Problem / niches construction
// ---------------------------------------------------------------------------

Problem build_problem(const ProblemSpec& spec) {
  if (spec.kind == "toy_cells") return toy_cell_problem();
  if (spec.kind == "synthetic") {
    return synthetic_continuous_problem(spec.dims, spec.modes);
  }
  if (spec.kind == "tabular") return load_tabular(spec.path);
  if (spec.kind == "tabular_csv") {
    return load_tabular_csv(spec.path, space_from_json(spec.space_json),
                            spec.penalty);
  }
  throw ConfigError("unknown problem kind '" + spec.kind + "'");
}

NicheSet build_niches(const ExperimentConfig& config, const Problem& problem) {
  if (!config.niches.explicit_json.empty()) {
    return niche_set_from_json(config.niches.explicit_json);
  }
  if (config.niches.grid > 0) {
    return synthetic_grid_niches(config.niches.grid);
  }
  // Percentiles of the feature over the enumerated space.
  const auto configs = problem.enumerate();
  if (!configs) {
    throw ConfigError(
        "config.niches: percentile niches need an enumerable problem; use "
        "'explicit' bounds instead");
  }
  std::vector<double> samples;
  samples.reserve(configs->size());
  for (const Configuration& c : *configs) {
    samples.push_back(problem.features(c)[0]);
  }
  NicheSet niches = niches_from_percentiles(samples, config.niches.percentiles);
  niches.name = problem.name();
  return niches;
}

double resolve_budget_units(const ExperimentConfig& config,
                            const Problem& problem) {
  if (config.budget_full_evals) {
    return OptimizerConfig::full_eval_budget(*config.budget_full_evals,
                                             problem.reference_fidelity());
  }
  return *config.budget_units;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

Archive run_replication(const ExperimentConfig& config, const Problem& problem,
                        const NicheSet& niches, int replication,
                        const EvalSink& sink) {
  OptimizerConfig params = config.params;
  params.seed = config.base_seed + static_cast<std::uint64_t>(replication);
  params.budget_units = resolve_budget_units(config, problem);

  const std::string& name = config.optimizer;
  if (name == "random_search") return random_search(problem, niches, params, sink);
  if (name == "bop_elites_star") return bop_elites_star(problem, niches, params, sink);
  if (name == "parego_star") return parego_star(problem, niches, params, sink);
  if (name == "map_elites") return map_elites(problem, niches, params, sink);
  if (name == "qd_hyperband") return qd_hyperband(problem, niches, params, sink);
  if (name == "bop_elites_hb") return bop_elites_hb(problem, niches, params, sink);
  if (name == "mo_hyperband") return mo_hyperband(problem, niches, params, sink);
  if (name == "parego_hb") return parego_hb(problem, niches, params, sink);
  if (name == "regularized_evolution") {
    const int id = config.constraint_niche;
    const auto it = std::find_if(
        niches.niches.begin(), niches.niches.end(),
        [id](const Niche& niche) { return niche.id == id; });
    if (it == niches.niches.end()) {
      throw ConfigError("config: constraint_niche " + std::to_string(id) +
                        " is not in the niche set");
    }
    return regularized_evolution(problem, *it, params, sink).archive;
  }
  throw ConfigError("unknown optimizer '" + name + "'");
}

namespace {

std::string trace_file_name(const ExperimentConfig& config, int replication) {
  return config.name + "_" + config.optimizer + "_rep" +
         std::to_string(replication) + ".jsonl";
}

TraceHeader make_header(const ExperimentConfig& config, const Problem& problem,
                        const NicheSet& niches, int replication) {
  TraceHeader header;
  header.config_hash = config_hash(config);
  header.config_json = materialized_config_json(config);
  header.seed = config.base_seed + static_cast<std::uint64_t>(replication);
  header.replication = replication;
  header.optimizer = config.optimizer;
  header.problem = problem.name();
  header.space_json = space_to_json(problem.space());
  header.niches = niches;
  header.reference_fidelity = problem.reference_fidelity();
  header.penalty = problem.penalty();
  header.budget_units = resolve_budget_units(config, problem);
  return header;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config,
                          const std::string& out_dir, bool resume,
                          int parallel) {
  const Problem problem = build_problem(config.problem);
  const NicheSet niches = build_niches(config, problem);
  fs::create_directories(out_dir);

  RunSummary summary;
  summary.trace_paths.resize(config.replications);

  std::atomic<int> next{0};
  std::atomic<int> executed{0};
  std::atomic<int> skipped{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      const int r = next.fetch_add(1);
      if (r >= config.replications) return;
      const std::string path =
          (fs::path(out_dir) / trace_file_name(config, r)).string();
      summary.trace_paths[r] = path;
      try {
        if (resume && trace_is_complete(path)) {
          skipped.fetch_add(1);
          continue;
        }
        TraceWriter writer(path, make_header(config, problem, niches, r));
        run_replication(config, problem, niches, r,
                        [&writer](const Evaluation& eval) {
                          writer.write(eval);
                        });
        writer.finish();
        executed.fetch_add(1);
      } catch (...) {
        // Partial trace stays on disk (no end marker); first failure wins.
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int workers = std::max(1, std::min(parallel, config.replications));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  summary.executed = executed.load();
  summary.skipped = skipped.load();
  return summary;
}

void write_oracle_file(const ExperimentConfig& config,
                       const std::string& path) {
  const Problem problem = build_problem(config.problem);
  const NicheSet niches = build_niches(config, problem);
  const std::vector<OracleEntry> oracle = brute_force_oracle(problem, niches);

  nlohmann::json j;
  j["problem"] = problem.name();
  j["reference_fidelity"] = problem.reference_fidelity();
  j["niches"] = detail::niche_set_to_json_obj(niches);
  auto entries = nlohmann::json::array();
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    nlohmann::json entry;
    entry["niche"] = niches.niches[i].id;
    if (oracle[i].objective) {
      entry["objective"] = *oracle[i].objective;
      entry["config"] = detail::config_to_json(*oracle[i].config,
                                               problem.space());
    } else {
      entry["objective"] = nullptr;
      entry["config"] = nullptr;
    }
    entries.push_back(std::move(entry));
  }
  j["optima"] = std::move(entries);
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("oracle: cannot open " + path);
  }
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

struct LoadedRun {
  TraceHeader header;
  AnytimeCurve curve;
  std::vector<bool> filled;
  std::vector<std::optional<double>> elite_objectives;
  std::vector<std::vector<double>> reference_points;  // (objective, features)
};

struct GroupKey {
  std::string problem;
  std::string optimizer;

  bool operator<(const GroupKey& other) const {
    if (problem != other.problem) return problem < other.problem;
    return optimizer < other.optimizer;
  }
};

LoadedRun load_run(const std::string& path) {
  const Trace trace = read_trace(path);
  if (!trace.complete) {
    throw std::runtime_error("report: incomplete trace " + path);
  }
  const Archive archive = replay_trace(trace);
  LoadedRun run;
  run.header = trace.header;
  run.curve = anytime_summed_error(archive, trace.header.penalty);
  for (std::size_t j = 0; j < archive.niches().size(); ++j) {
    run.filled.push_back(archive.elite(j).has_value());
    run.elite_objectives.push_back(archive.elite_objective(j));
  }
  for (const Evaluation& eval : archive.log()) {
    if (eval.fidelity != archive.reference_fidelity()) continue;
    std::vector<double> v;
    v.reserve(1 + eval.features.size());
    v.push_back(eval.objective);
    v.insert(v.end(), eval.features.begin(), eval.features.end());
    run.reference_points.push_back(std::move(v));
  }
  return run;
}

std::ofstream open_report(const std::string& out_dir, const std::string& name) {
  std::ofstream out(fs::path(out_dir) / name);
  if (!out) {
    throw std::runtime_error("report: cannot open " + name);
  }
  return out;
}

// The QD optimizer answering each multi-objective optimizer.
const std::vector<std::pair<std::string, std::string>>& counterpart_pairs() {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"parego_hb", "bop_elites_hb"},
      {"mo_hyperband", "qd_hyperband"},
      {"parego_star", "bop_elites_star"},
  };
  return pairs;
}

}  // namespace

std::vector<std::string> find_trace_files(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

void write_reports(const std::vector<std::string>& trace_paths,
                   const std::string& out_dir, const ReportOptions& options) {
  fs::create_directories(out_dir);
  std::map<GroupKey, std::vector<LoadedRun>> groups;
  for (const std::string& path : trace_paths) {
    LoadedRun run = load_run(path);
    groups[GroupKey{run.header.problem, run.header.optimizer}].push_back(
        std::move(run));
  }
  for (auto& [key, runs] : groups) {
    std::sort(runs.begin(), runs.end(),
              [](const LoadedRun& a, const LoadedRun& b) {
                return a.header.replication < b.header.replication;
              });
  }

  // Anytime curves: mean +/- standard error on the merged budget grid.
  {
    auto out = open_report(out_dir, "anytime.csv");
    out << "problem,optimizer,budget,mean,se\n";
    for (const auto& [key, runs] : groups) {
      std::vector<AnytimeCurve> curves;
      for (const LoadedRun& run : runs) curves.push_back(run.curve);
      const std::vector<double> grid = merge_budget_grid(curves);
      const std::vector<MeanSe> agg = aggregate_curves(curves, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        out << key.problem << "," << key.optimizer << ","
            << format_g17(grid[i]) << "," << format_g17(agg[i].mean) << ","
            << format_g17(agg[i].se) << "\n";
      }
    }
  }

  // Final summed errors.
  std::map<GroupKey, MeanSe> final_values;
  {
    auto out = open_report(out_dir, "final.csv");
    out << "problem,optimizer,mean,se\n";
    for (const auto& [key, runs] : groups) {
      std::vector<double> values;
      for (const LoadedRun& run : runs) {
        values.push_back(summed_niche_error(run.elite_objectives,
                                            run.header.penalty));
      }
      const MeanSe ms = mean_se(values);
      final_values[key] = ms;
      out << key.problem << "," << key.optimizer << "," << format_g17(ms.mean)
          << "," << format_g17(ms.se) << "\n";
    }
  }

  // Ranks averaged over problems, fractional on ties.
  {
    auto out = open_report(out_dir, "ranks.csv");
    out << "optimizer,mean_rank,se\n";
    std::set<std::string> problems;
    std::set<std::string> optimizers;
    for (const auto& [key, ms] : final_values) {
      problems.insert(key.problem);
      optimizers.insert(key.optimizer);
    }
    std::map<std::string, std::vector<double>> ranks;
    for (const std::string& problem : problems) {
      std::vector<std::pair<double, std::string>> entries;
      for (const std::string& optimizer : optimizers) {
        const auto it = final_values.find(GroupKey{problem, optimizer});
        if (it != final_values.end()) {
          entries.emplace_back(it->second.mean, optimizer);
        }
      }
      std::sort(entries.begin(), entries.end());
      for (std::size_t i = 0; i < entries.size();) {
        std::size_t j = i;
        while (j < entries.size() && entries[j].first == entries[i].first) ++j;
        const double rank = (static_cast<double>(i + 1) +
                             static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) {
          ranks[entries[t].second].push_back(rank);
        }
        i = j;
      }
    }
    for (const auto& [optimizer, values] : ranks) {
      const MeanSe ms = mean_se(values);
      out << optimizer << "," << format_g17(ms.mean) << "," << format_g17(ms.se)
          << "\n";
    }
  }

  // ERT ratios of multi-objective optimizers against their QD counterparts;
  // the target is the multi-objective optimizer's mean summed error at half
  // budget.
  {
    auto out = open_report(out_dir, "ert_ratio.csv");
    out << "problem,mo_optimizer,qd_optimizer,target,mo_ert,qd_ert,ratio\n";
    std::set<std::string> problems;
    for (const auto& [key, runs] : groups) problems.insert(key.problem);
    for (const std::string& problem : problems) {
      for (const auto& [mo_name, qd_name] : counterpart_pairs()) {
        const auto mo_it = groups.find(GroupKey{problem, mo_name});
        const auto qd_it = groups.find(GroupKey{problem, qd_name});
        if (mo_it == groups.end() || qd_it == groups.end()) continue;

        std::vector<double> halves;
        for (const LoadedRun& run : mo_it->second) {
          halves.push_back(run.curve.value_at(run.header.budget_units / 2.0));
        }
        const double target = mean_se(halves).mean;

        auto ert_of = [target](const std::vector<LoadedRun>& runs) {
          std::vector<AnytimeCurve> curves;
          std::vector<double> budgets;
          for (const LoadedRun& run : runs) {
            curves.push_back(run.curve);
            budgets.push_back(run.header.budget_units);
          }
          return expected_running_time(curves, budgets, target);
        };
        const auto mo_ert = ert_of(mo_it->second);
        const auto qd_ert = ert_of(qd_it->second);
        out << problem << "," << mo_name << "," << qd_name << ","
            << format_g17(target) << ","
            << (mo_ert ? format_g17(*mo_ert) : "unreached") << ","
            << (qd_ert ? format_g17(*qd_ert) : "unreached") << ",";
        if (mo_ert && qd_ert && *qd_ert > 0) {
          out << format_g17(*mo_ert / *qd_ert);
        } else {
          out << "NA";
        }
        out << "\n";
      }
    }
  }

  // Niche-miss rates.
  {
    auto out = open_report(out_dir, "niche_miss.csv");
    out << "problem,optimizer,niche,miss_rate\n";
    for (const auto& [key, runs] : groups) {
      std::vector<std::vector<bool>> filled;
      for (const LoadedRun& run : runs) filled.push_back(run.filled);
      const std::vector<double> rates = niche_miss_frequency(filled);
      for (std::size_t j = 0; j < rates.size(); ++j) {
        out << key.problem << "," << key.optimizer << ","
            << runs.front().header.niches.niches[j].id << ","
            << format_g17(rates[j]) << "\n";
      }
    }
  }

  // Per-niche best errors (penalty when empty).
  {
    auto out = open_report(out_dir, "niche_best.csv");
    out << "problem,optimizer,niche,mean_best,se\n";
    for (const auto& [key, runs] : groups) {
      const std::size_t c = runs.front().elite_objectives.size();
      for (std::size_t j = 0; j < c; ++j) {
        std::vector<double> values;
        for (const LoadedRun& run : runs) {
          values.push_back(
              run.elite_objectives[j].value_or(run.header.penalty));
        }
        const MeanSe ms = mean_se(values);
        out << key.problem << "," << key.optimizer << ","
            << runs.front().header.niches.niches[j].id << ","
            << format_g17(ms.mean) << "," << format_g17(ms.se) << "\n";
      }
    }
  }

  // Hypervolume indicator against the pooled reference front, nadir at the
  // pooled component maxima plus a 1% margin.
  {
    const auto transform = [&options](std::vector<double> point) {
      if (options.log_features) {
        for (std::size_t d = 1; d < point.size(); ++d) {
          if (!(point[d] > 0)) {
            throw std::invalid_argument(
                "report: --log-features requires positive feature values");
          }
          point[d] = std::log(point[d]);
        }
      }
      return point;
    };
    auto out = open_report(out_dir, "hvi.csv");
    out << "problem,optimizer,mean,se\n";
    std::set<std::string> problems;
    for (const auto& [key, runs] : groups) problems.insert(key.problem);
    for (const std::string& problem : problems) {
      std::vector<std::vector<double>> pooled;
      for (const auto& [key, runs] : groups) {
        if (key.problem != problem) continue;
        for (const LoadedRun& run : runs) {
          for (const auto& p : run.reference_points) {
            pooled.push_back(transform(p));
          }
        }
      }
      if (pooled.empty()) continue;
      const std::size_t dim = pooled.front().size();
      if (dim < 2 || dim > 3) continue;
      std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
      std::vector<double> nadir(dim, -std::numeric_limits<double>::infinity());
      for (const auto& p : pooled) {
        for (std::size_t d = 0; d < dim; ++d) {
          lo[d] = std::min(lo[d], p[d]);
          nadir[d] = std::max(nadir[d], p[d]);
        }
      }
      for (std::size_t d = 0; d < dim; ++d) {
        const double span = nadir[d] - lo[d];
        nadir[d] += 0.01 * (span > 0 ? span : 1.0);
      }
      std::vector<std::vector<double>> reference;
      for (const std::size_t i : pareto_front(pooled)) {
        reference.push_back(pooled[i]);
      }
      for (const auto& [key, runs] : groups) {
        if (key.problem != problem) continue;
        std::vector<double> values;
        for (const LoadedRun& run : runs) {
          std::vector<std::vector<double>> points;
          points.reserve(run.reference_points.size());
          for (const auto& p : run.reference_points) {
            points.push_back(transform(p));
          }
          std::vector<std::vector<double>> front;
          for (const std::size_t i : pareto_front(points)) {
            front.push_back(points[i]);
          }
          values.push_back(hypervolume_indicator(front, reference, nadir));
        }
        const MeanSe ms = mean_se(values);
        out << problem << "," << key.optimizer << "," << format_g17(ms.mean)
            << "," << format_g17(ms.se) << "\n";
      }
    }
  }
}

}  // namespace qdopt
