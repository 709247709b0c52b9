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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "qdopt/metrics.hpp"
#include "qdopt/optimizers.hpp"
#include "qdopt/problems.hpp"

using namespace qdopt;

namespace {

OptimizerConfig toy_config(std::uint64_t seed, int full_evals) {
  OptimizerConfig config;
  config.seed = seed;
  config.budget_units = OptimizerConfig::full_eval_budget(full_evals, 27.0);
  return config;
}

bool same_log(const Archive& a, const Archive& b) {
  if (a.log().size() != b.log().size()) return false;
  for (std::size_t i = 0; i < a.log().size(); ++i) {
    const Evaluation& x = a.log()[i];
    const Evaluation& y = b.log()[i];
    if (x.key != y.key || x.fidelity != y.fidelity ||
        x.objective != y.objective || x.budget != y.budget ||
        x.features != y.features) {
      return false;
    }
  }
  return true;
}

void check_budget_and_monotonicity(const Archive& archive, double budget) {
  CHECK(archive.log().back().budget == budget);
  // Per-niche incumbent trajectories never worsen.
  const auto& niches = archive.niches();
  std::vector<double> best(niches.size(),
                           std::numeric_limits<double>::infinity());
  for (const Evaluation& eval : archive.log()) {
    if (eval.fidelity != archive.reference_fidelity()) continue;
    const auto member = membership(eval.features, niches);
    for (std::size_t j = 0; j < niches.size(); ++j) {
      if (member[j]) best[j] = std::min(best[j], eval.objective);
    }
  }
  for (std::size_t j = 0; j < niches.size(); ++j) {
    if (archive.elite_objective(j)) {
      CHECK(*archive.elite_objective(j) == best[j]);
    }
  }
}

}  // namespace

TEST_CASE("run_generic_qdo") {
  const Problem problem = toy_cell_problem();
  const NicheSet niches = toy_cell_niches(problem, {50.0});
  const auto uniform = [&problem](const Archive&, Rng& rng) {
    return sample_random(problem.space(), rng);
  };

  SUBCASE("a budget equal to the design size never enters the loop") {
    OptimizerConfig config = toy_config(1, 10);
    config.initial_design = 10;
    const Archive archive =
        run_generic_qdo(uniform, problem, niches, config);
    CHECK(archive.log().size() == 10);
    // Elites are the per-niche minima of the design.
    std::vector<std::optional<double>> best(niches.size());
    for (const Evaluation& eval : archive.log()) {
      const auto member = membership(eval.features, niches);
      for (std::size_t j = 0; j < niches.size(); ++j) {
        if (member[j] && (!best[j] || eval.objective < *best[j])) {
          best[j] = eval.objective;
        }
      }
    }
    for (std::size_t j = 0; j < niches.size(); ++j) {
      CHECK(archive.elite_objective(j) == best[j]);
    }
  }

  SUBCASE("exhaustive random proposals reach the brute-force optima") {
    const auto oracle = brute_force_oracle(problem, niches);
    const Archive archive =
        run_generic_qdo(uniform, problem, niches, toy_config(7, 1500));
    for (std::size_t j = 0; j < niches.size(); ++j) {
      CHECK(*archive.elite_objective(j) == *oracle[j].objective);
    }
  }

  SUBCASE("equal seeds give identical archives") {
    const Archive a = run_generic_qdo(uniform, problem, niches, toy_config(3, 25));
    const Archive b = run_generic_qdo(uniform, problem, niches, toy_config(3, 25));
    CHECK(same_log(a, b));
  }

  SUBCASE("budgets that are not full-evaluation multiples are rejected") {
    OptimizerConfig config;
    config.seed = 0;
    config.budget_units = 40.0;  // not a multiple of 27
    CHECK_THROWS_AS(run_generic_qdo(uniform, problem, niches, config),
                    std::invalid_argument);
  }
}

TEST_CASE("random_search consumes its budget exactly") {
  const Problem problem = toy_cell_problem();
  const NicheSet niches = toy_cell_niches(problem, {50.0});
  const Archive archive = random_search(problem, niches, toy_config(5, 40));
  CHECK(archive.log().size() == 40);
  check_budget_and_monotonicity(archive, 40 * 27.0);
}

TEST_CASE("bop_elites_star") {
  const Problem problem = toy_cell_problem();
  const NicheSet niches = toy_cell_niches(problem, {50.0});

  SUBCASE("with budget equal to the design no model is ever fit") {
    OptimizerConfig config = toy_config(11, 10);
    config.initial_design = 10;
    const Archive model_run = bop_elites_star(problem, niches, config);
    const Archive random_run = random_search(problem, niches, config);
    CHECK(same_log(model_run, random_run));
  }

  SUBCASE("determinism and exact budget") {
    const Archive a = bop_elites_star(problem, niches, toy_config(2, 30));
    const Archive b = bop_elites_star(problem, niches, toy_config(2, 30));
    CHECK(same_log(a, b));
    check_budget_and_monotonicity(a, 30 * 27.0);
  }

  SUBCASE("both nested niches filled at moderate budget") {
    const Archive archive = bop_elites_star(problem, niches, toy_config(0, 60));
    CHECK(archive.filled_niches() == 2);
  }

  SUBCASE("single unbounded niche: no worse than random search's median") {
    NicheSet single;
    single.niches = {Niche{1, {Interval{}}}};
    std::vector<double> random_best;
    std::vector<double> model_best;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Archive rs =
          random_search(problem, single, toy_config(seed, 40));
      const Archive bo =
          bop_elites_star(problem, single, toy_config(seed, 40));
      random_best.push_back(*rs.elite_objective(0));
      model_best.push_back(*bo.elite_objective(0));
    }
    std::sort(random_best.begin(), random_best.end());
    const double random_median =
        0.5 * (random_best[9] + random_best[10]);
    double model_mean = 0.0;
    for (const double v : model_best) model_mean += v;
    model_mean /= 20.0;
    CHECK(model_mean <= random_median);
  }

  SUBCASE("an initial design below two is rejected") {
    OptimizerConfig config = toy_config(0, 20);
    config.initial_design = 1;
    CHECK_THROWS_AS(bop_elites_star(problem, niches, config),
                    std::invalid_argument);
  }
}

TEST_CASE("parego_star") {
  const Problem problem = toy_cell_problem();
  const NicheSet niches = toy_cell_niches(problem, {50.0});

  SUBCASE("defaults match the scalarization recipe") {
    const OptimizerConfig config;
    CHECK(config.parego_gamma == 0.05);
  }

  SUBCASE("determinism, exact budget, niche bookkeeping") {
    const Archive a = parego_star(problem, niches, toy_config(4, 30));
    const Archive b = parego_star(problem, niches, toy_config(4, 30));
    CHECK(same_log(a, b));
    check_budget_and_monotonicity(a, 30 * 27.0);
    // Niche bookkeeping is recorded even though the optimizer ignores it.
    CHECK(a.filled_niches() >= 1);
  }
}

TEST_CASE("map_elites") {
  const Problem problem = toy_cell_problem();
  const NicheSet niches = toy_cell_niches(problem, {50.0});

  SUBCASE("defaults follow the evolutionary recipe") {
    const OptimizerConfig config;
    CHECK(config.population == 100);
    CHECK(config.mutation_prob == 0.1);
  }

  SUBCASE("zero mutation probability clones the parents") {
    OptimizerConfig config = toy_config(9, 12);
    config.population = 6;
    config.mutation_prob = 0.0;
    const Archive archive = map_elites(problem, niches, config);
    REQUIRE(archive.log().size() == 12);
    std::set<std::string> initial_keys;
    for (std::size_t i = 0; i < 6; ++i) {
      initial_keys.insert(archive.log()[i].key);
    }
    // Offspring duplicate initial configurations; elites cannot change.
    for (std::size_t i = 6; i < 12; ++i) {
      CHECK(initial_keys.count(archive.log()[i].key) == 1);
    }
  }

  SUBCASE("a generous budget fills every reachable niche") {
    OptimizerConfig config = toy_config(13, 120);
    config.population = 20;
    const Archive archive = map_elites(problem, niches, config);
    CHECK(archive.filled_niches() == niches.size());
    check_budget_and_monotonicity(archive, 120 * 27.0);
  }

  SUBCASE("determinism") {
    OptimizerConfig config = toy_config(3, 25);
    config.population = 10;
    const Archive a = map_elites(problem, niches, config);
    const Archive b = map_elites(problem, niches, config);
    CHECK(same_log(a, b));
  }
}

TEST_CASE("regularized_evolution") {
  const Problem problem = toy_cell_problem();

  SUBCASE("defaults follow the aging-evolution recipe") {
    const OptimizerConfig config;
    CHECK(config.population == 100);
    CHECK(config.mutation_prob == 0.1);
    CHECK(config.mutation_ratio == 0.5);
    CHECK(config.parent_ratio == 0.25);
  }

  SUBCASE("an unconstrained run is plain aging evolution") {
    const Niche everything{1, {Interval{}}};
    OptimizerConfig config = toy_config(6, 60);
    config.population = 15;
    const EvolutionResult result =
        regularized_evolution(problem, everything, config);
    REQUIRE(result.best.has_value());
    check_budget_and_monotonicity(result.archive, 60 * 27.0);
    // The reported best matches the running minimum of the log.
    double best = std::numeric_limits<double>::infinity();
    for (const Evaluation& eval : result.archive.log()) {
      best = std::min(best, eval.objective);
    }
    CHECK(*result.objective == best);
  }

  SUBCASE("infeasible offspring are charged the penalty") {
    // A tight constraint: a sizeable share of mutations falls outside.
    const Niche tight{1, {Interval{0.0, 2.75}}};
    OptimizerConfig config = toy_config(8, 60);
    config.population = 10;
    const EvolutionResult result =
        regularized_evolution(problem, tight, config);
    REQUIRE(result.best.has_value());
    int penalized = 0;
    for (const Evaluation& eval : result.archive.log()) {
      if (eval.objective == problem.penalty()) {
        ++penalized;
        CHECK(!tight.contains(eval.features));
      }
    }
    CHECK(penalized > 0);
    CHECK(result.archive.log().size() == 60);  // counts stay exact
    // The reported best is feasible and optimal among feasible evaluations.
    double best_feasible = std::numeric_limits<double>::infinity();
    for (const Evaluation& eval : result.archive.log()) {
      if (tight.contains(eval.features)) {
        best_feasible = std::min(best_feasible, eval.objective);
      }
    }
    CHECK(*result.objective == best_feasible);
  }

  SUBCASE("determinism") {
    const Niche everything{1, {Interval{}}};
    OptimizerConfig config = toy_config(10, 40);
    config.population = 10;
    const EvolutionResult a =
        regularized_evolution(problem, everything, config);
    const EvolutionResult b =
        regularized_evolution(problem, everything, config);
    CHECK(same_log(a.archive, b.archive));
  }
}

TEST_CASE("all full-fidelity optimizers consume exactly their budget") {
  const Problem problem = toy_cell_problem();
  const NicheSet niches = toy_cell_niches(problem, {50.0});
  OptimizerConfig config = toy_config(1, 24);
  config.population = 8;

  const std::vector<Archive> archives = {
      random_search(problem, niches, config),
      bop_elites_star(problem, niches, config),
      parego_star(problem, niches, config),
      map_elites(problem, niches, config),
  };
  for (const Archive& archive : archives) {
    CHECK(archive.log().size() == 24);
    CHECK(archive.log().back().budget == 24 * 27.0);
  }
}
