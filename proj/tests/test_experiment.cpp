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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qdopt/experiment.hpp"
#include "qdopt/metrics.hpp"
#include "qdopt/trace.hpp"

using namespace qdopt;

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string toy_config_json(const std::string& optimizer, int full_evals,
                            int replications, int seed) {
  std::ostringstream ss;
  ss << R"({"name":"toytest","problem":{"kind":"toy_cells"},)"
     << R"("niches":{"percentiles":[50]},)"
     << R"("optimizer":")" << optimizer << R"(",)"
     << R"("budget":{"full_evals":)" << full_evals << "},"
     << R"("replications":)" << replications << ","
     << R"("seed":)" << seed << ","
     << R"("optimizer_params":{"population":8}})";
  return ss.str();
}

}  // namespace

TEST_CASE("experiment config parsing and validation") {
  SUBCASE("a valid config parses with defaults materialized") {
    const ExperimentConfig config =
        parse_experiment_config(toy_config_json("random_search", 20, 2, 1));
    CHECK(config.optimizer == "random_search");
    CHECK(config.replications == 2);
    CHECK(*config.budget_full_evals == 20);
    const std::string materialized = materialized_config_json(config);
    CHECK(materialized.find("\"initial_design\":10") != std::string::npos);
    CHECK(materialized.find("\"trees\":100") != std::string::npos);
    CHECK(config_hash(config).size() == 16);
  }

  SUBCASE("unknown optimizers are rejected before anything runs") {
    CHECK_THROWS_WITH_AS(
        parse_experiment_config(toy_config_json("gradient_descent", 5, 1, 0)),
        doctest::Contains("unknown optimizer"), ConfigError);
  }

  SUBCASE("field-level messages point at the problem") {
    CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"problem":{}})"),
                         doctest::Contains("kind"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_experiment_config(
            R"({"problem":{"kind":"toy_cells"},"niches":{"percentiles":[50]},)"
            R"("optimizer":"random_search"})"),
        doctest::Contains("budget"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_experiment_config(
            R"({"problem":{"kind":"toy_cells"},"niches":{},)"
            R"("optimizer":"random_search","budget":{"full_evals":5}})"),
        doctest::Contains("niches"), ConfigError);
  }

  SUBCASE("regularized evolution requires a constraint niche") {
    std::string json = toy_config_json("regularized_evolution", 10, 1, 0);
    CHECK_THROWS_WITH_AS(parse_experiment_config(json),
                         doctest::Contains("constraint_niche"), ConfigError);
  }
}

TEST_CASE("run_experiment writes ledger-exact traces") {
  TempDir dir("qdopt_run_test");
  const ExperimentConfig config =
      parse_experiment_config(toy_config_json("random_search", 20, 2, 7));
  const RunSummary summary = run_experiment(config, dir.str());
  CHECK(summary.executed == 2);
  CHECK(summary.skipped == 0);
  REQUIRE(summary.trace_paths.size() == 2);

  for (int r = 0; r < 2; ++r) {
    const Trace trace = read_trace(summary.trace_paths[r]);
    CHECK(trace.complete);
    CHECK(trace.header.replication == r);
    CHECK(trace.header.seed == 7 + static_cast<std::uint64_t>(r));
    CHECK(trace.records.size() == 20);
    CHECK(trace.records.back().budget == 20 * 27.0);
    CHECK(trace.header.budget_units == 20 * 27.0);
  }
}

TEST_CASE("traces replay into identical archives and reports") {
  TempDir dir("qdopt_replay_test");
  const ExperimentConfig config =
      parse_experiment_config(toy_config_json("bop_elites_star", 15, 1, 3));
  const Problem problem = build_problem(config.problem);
  const NicheSet niches = build_niches(config, problem);

  std::vector<Evaluation> live;
  const Archive archive = run_replication(
      config, problem, niches, 0,
      [&live](const Evaluation& eval) { live.push_back(eval); });

  const RunSummary summary = run_experiment(config, dir.str());
  const Trace trace = read_trace(summary.trace_paths[0]);
  const Archive replayed = replay_trace(trace);

  REQUIRE(replayed.log().size() == archive.log().size());
  for (std::size_t i = 0; i < archive.log().size(); ++i) {
    CHECK(replayed.log()[i].key == archive.log()[i].key);
    CHECK(replayed.log()[i].objective == archive.log()[i].objective);
    CHECK(replayed.log()[i].fidelity == archive.log()[i].fidelity);
    CHECK(replayed.log()[i].budget == archive.log()[i].budget);
  }
  for (std::size_t j = 0; j < niches.size(); ++j) {
    CHECK(replayed.elite_objective(j) == archive.elite_objective(j));
  }
  CHECK(summed_niche_error(replayed, problem.penalty()) ==
        summed_niche_error(archive, problem.penalty()));
}

TEST_CASE("identical seeds give byte-identical traces; resume skips") {
  TempDir dir_a("qdopt_det_a");
  TempDir dir_b("qdopt_det_b");
  const ExperimentConfig config =
      parse_experiment_config(toy_config_json("map_elites", 16, 2, 11));

  run_experiment(config, dir_a.str());
  run_experiment(config, dir_b.str());
  for (int r = 0; r < 2; ++r) {
    const std::string name = "toytest_map_elites_rep" + std::to_string(r) + ".jsonl";
    CHECK(slurp((dir_a.path / name).string()) ==
          slurp((dir_b.path / name).string()));
  }

  SUBCASE("interrupted runs resume to identical bytes") {
    TempDir dir_c("qdopt_resume");
    // Simulate an interruption: replication 0 completed, replication 1 cut
    // off mid-write.
    fs::copy_file(dir_a.path / "toytest_map_elites_rep0.jsonl",
                  dir_c.path / "toytest_map_elites_rep0.jsonl");
    {
      const std::string full =
          slurp((dir_a.path / "toytest_map_elites_rep1.jsonl").string());
      std::ofstream partial(dir_c.path / "toytest_map_elites_rep1.jsonl");
      partial << full.substr(0, full.size() / 2);
    }
    const RunSummary resumed = run_experiment(config, dir_c.str(), true);
    CHECK(resumed.skipped == 1);
    CHECK(resumed.executed == 1);
    for (int r = 0; r < 2; ++r) {
      const std::string name =
          "toytest_map_elites_rep" + std::to_string(r) + ".jsonl";
      CHECK(slurp((dir_c.path / name).string()) ==
            slurp((dir_a.path / name).string()));
    }
  }

  SUBCASE("parallel execution writes the same bytes") {
    TempDir dir_p("qdopt_parallel");
    run_experiment(config, dir_p.str(), false, 2);
    for (int r = 0; r < 2; ++r) {
      const std::string name =
          "toytest_map_elites_rep" + std::to_string(r) + ".jsonl";
      CHECK(slurp((dir_p.path / name).string()) ==
            slurp((dir_a.path / name).string()));
    }
  }
}

TEST_CASE("oracle files") {
  TempDir dir("qdopt_oracle_test");
  const ExperimentConfig config =
      parse_experiment_config(toy_config_json("random_search", 5, 1, 0));
  const std::string path = (dir.path / "oracle.json").string();
  write_oracle_file(config, path);
  const std::string text = slurp(path);
  CHECK(text.find("\"optima\"") != std::string::npos);
  CHECK(text.find("19.147969736080384") != std::string::npos);
  CHECK(text.find("12.973934612961298") != std::string::npos);

  SUBCASE("non-enumerable problems are refused") {
    ExperimentConfig synthetic = config;
    synthetic.problem.kind = "synthetic";
    synthetic.niches.percentiles.clear();
    synthetic.niches.grid = 3;
    CHECK_THROWS_AS(
        write_oracle_file(synthetic, (dir.path / "o2.json").string()),
        std::invalid_argument);
  }

  SUBCASE("empty niches are marked empty") {
    ExperimentConfig empty_niche = config;
    empty_niche.niches.percentiles.clear();
    empty_niche.niches.explicit_json =
        R"({"layout":"general","niches":[{"id":1,"bounds":[{"lower":-10,"upper":0}]}]})";
    const std::string p2 = (dir.path / "o3.json").string();
    write_oracle_file(empty_niche, p2);
    CHECK(slurp(p2).find("\"objective\": null") != std::string::npos);
  }
}

TEST_CASE("report tables") {
  TempDir traces("qdopt_report_traces");
  TempDir reports("qdopt_report_out");

  // Two optimizers on the same problem, two replications each.
  for (const std::string optimizer : {"random_search", "map_elites"}) {
    const ExperimentConfig config =
        parse_experiment_config(toy_config_json(optimizer, 12, 2, 5));
    run_experiment(config, traces.str());
  }
  const auto paths = find_trace_files(traces.str());
  REQUIRE(paths.size() == 4);
  write_reports(paths, reports.str());

  SUBCASE("regenerating reports is byte-identical") {
    const std::string before = slurp((reports.path / "anytime.csv").string());
    write_reports(paths, reports.str());
    CHECK(slurp((reports.path / "anytime.csv").string()) == before);
  }

  SUBCASE("a single trace's curve equals its own step function") {
    TempDir solo_traces("qdopt_solo_traces");
    TempDir solo_reports("qdopt_solo_reports");
    const ExperimentConfig config =
        parse_experiment_config(toy_config_json("random_search", 12, 1, 5));
    const RunSummary summary = run_experiment(config, solo_traces.str());
    write_reports(summary.trace_paths, solo_reports.str());

    const Trace trace = read_trace(summary.trace_paths[0]);
    const AnytimeCurve curve =
        anytime_summed_error(replay_trace(trace), trace.header.penalty);

    const std::string csv = slurp((solo_reports.path / "anytime.csv").string());
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    std::size_t i = 0;
    while (std::getline(lines, line)) {
      REQUIRE(i < curve.points.size());
      std::ostringstream expected;
      char buffer[64];
      std::snprintf(buffer, sizeof(buffer), "%.17g", curve.points[i].first);
      expected << "toy_cells,random_search," << buffer << ",";
      std::snprintf(buffer, sizeof(buffer), "%.17g", curve.points[i].second);
      expected << buffer << ",0";
      CHECK(line == expected.str());
      ++i;
    }
    CHECK(i == curve.points.size());
  }

  SUBCASE("all tables exist with the documented headers") {
    CHECK(slurp((reports.path / "anytime.csv").string())
              .starts_with("problem,optimizer,budget,mean,se"));
    CHECK(slurp((reports.path / "final.csv").string())
              .starts_with("problem,optimizer,mean,se"));
    CHECK(slurp((reports.path / "ranks.csv").string())
              .starts_with("optimizer,mean_rank,se"));
    CHECK(slurp((reports.path / "ert_ratio.csv").string())
              .starts_with(
                  "problem,mo_optimizer,qd_optimizer,target,mo_ert,qd_ert,ratio"));
    CHECK(slurp((reports.path / "niche_miss.csv").string())
              .starts_with("problem,optimizer,niche,miss_rate"));
    CHECK(slurp((reports.path / "niche_best.csv").string())
              .starts_with("problem,optimizer,niche,mean_best,se"));
    CHECK(slurp((reports.path / "hvi.csv").string())
              .starts_with("problem,optimizer,mean,se"));
  }
}

TEST_CASE("ranks on a two-problem fixture match the hand computation") {
  TempDir traces("qdopt_rank_traces");
  TempDir reports("qdopt_rank_reports");

  // Craft traces directly: two problems, two optimizers, one replication.
  // "alpha" finds 1.0/2.0 (problems p/q), "beta" finds 2.0/4.0, so alpha
  // ranks 1 on both problems and beta ranks 2 on both.
  const std::map<std::pair<std::string, std::string>, double> finals = {
      {{"p", "alpha"}, 1.0},
      {{"p", "beta"}, 2.0},
      {{"q", "alpha"}, 2.0},
      {{"q", "beta"}, 4.0},
  };
  ParamSpace ps;
  ps.dims.push_back(RealDim{"x", 0.0, 1.0});
  const SearchSpace space = ps;
  for (const auto& [key, value] : finals) {
    TraceHeader header;
    header.config_hash = "fixture";
    header.seed = 0;
    header.replication = 0;
    header.optimizer = key.second;
    header.problem = key.first;
    header.space_json = space_to_json(space);
    NicheSet single;
    single.niches = {Niche{1, {Interval{}}}};
    header.niches = single;
    header.reference_fidelity = 1.0;
    header.penalty = 100.0;
    header.budget_units = 1.0;
    TraceWriter writer((traces.path / (key.first + "_" + key.second + ".jsonl")).string(),
                       header);
    Evaluation eval;
    ParamConfig config;
    config.values = {0.5};
    eval.config = config;
    eval.key = canonical_key(eval.config, space);
    eval.fidelity = 1.0;
    eval.objective = value;
    eval.features = {0.5};
    eval.budget = 1.0;
    writer.write(eval);
    writer.finish();
  }
  write_reports(find_trace_files(traces.str()), reports.str());

  const std::string ranks = slurp((reports.path / "ranks.csv").string());
  CHECK(ranks == "optimizer,mean_rank,se\nalpha,1,0\nbeta,2,0\n");
}

TEST_CASE("ert ratio table pairs optimizers with their counterparts") {
  TempDir traces("qdopt_ert_traces");
  TempDir reports("qdopt_ert_reports");
  for (const std::string optimizer : {"bop_elites_star", "parego_star"}) {
    const ExperimentConfig config =
        parse_experiment_config(toy_config_json(optimizer, 14, 2, 9));
    run_experiment(config, traces.str());
  }
  write_reports(find_trace_files(traces.str()), reports.str());
  const std::string table = slurp((reports.path / "ert_ratio.csv").string());
  CHECK(table.find("toy_cells,parego_star,bop_elites_star,") !=
        std::string::npos);
}

TEST_CASE("schema version mismatches are rejected") {
  TempDir dir("qdopt_schema_test");
  const std::string path = (dir.path / "bad.jsonl").string();
  {
    std::ofstream out(path);
    out << R"({"type":"header","schema_version":999,"config_hash":"x",)"
        << R"("config":null,"seed":0,"replication":0,"optimizer":"random_search",)"
        << R"("problem":"p","space":{"type":"param","dims":[{"name":"x","kind":"real","lo":0,"hi":1}]},)"
        << R"("niches":{"layout":"general","niches":[{"id":1,"bounds":[{"lower":null,"upper":null}]}]},)"
        << R"("reference_fidelity":1,"penalty":100,"budget_units":1})" << "\n";
  }
  CHECK_THROWS_WITH_AS(read_trace(path), doctest::Contains("schema version"),
                       std::runtime_error);
}
