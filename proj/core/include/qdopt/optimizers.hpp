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

#ifndef QDOPT_OPTIMIZERS_HPP_
#define QDOPT_OPTIMIZERS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "qdopt/archive.hpp"
#include "qdopt/problems.hpp"
#include "qdopt/rng.hpp"
#include "qdopt/surrogate.hpp"

namespace qdopt {

/// Observes every evaluation as it is recorded (trace emission).
using EvalSink = std::function<void(const Evaluation&)>;

/// Named random streams of an optimizer run. Separating concerns keeps the
/// sampling sequence identical across optimizers that share their sampling
/// behaviour (e.g. the rho=1 degeneration of model-based Hyperband).
namespace streams {
inline constexpr std::uint64_t kSampler = 0;
inline constexpr std::uint64_t kModel = 1;
inline constexpr std::uint64_t kProposal = 2;
inline constexpr std::uint64_t kPromotion = 3;
inline constexpr std::uint64_t kRho = 4;
}  // namespace streams

struct OptimizerConfig {
  int initial_design = 10;
  std::uint64_t seed = 0;
  /// Total budget in fidelity units, including the initial design.
  /// Full-fidelity optimizers require a multiple of the reference fidelity.
  double budget_units = 0.0;

  ForestParams forest;
  int n_candidates = 100;  // proposal candidates per round
  double rho = 0.0;        // fraction of multifidelity proposals drawn at random
  double parego_gamma = 0.05;
  int parego_s = 0;  // 0 = default grid granularity for the objective count

  // Evolutionary parameters.
  int population = 100;
  double mutation_prob = 0.1;
  double mutation_ratio = 0.5;
  double parent_ratio = 0.25;

  // Hyperband parameters.
  double eta = 3.0;
  bool hb_sequential = false;  // classic bracket-by-bracket ordering

  std::function<void(const std::string&)> log;  // optional diagnostics

  static double full_eval_budget(int evaluations, double reference_fidelity) {
    return static_cast<double>(evaluations) * reference_fidelity;
  }
};

/// The generic iterative quality-diversity loop: evaluate an initial design,
/// then propose/evaluate one configuration at a time at the reference
/// fidelity, updating every containing niche's elite, until the budget is
/// spent.
Archive run_generic_qdo(
    const std::function<Configuration(const Archive&, Rng&)>& propose,
    const Problem& problem, const NicheSet& niches,
    const OptimizerConfig& config, const EvalSink& sink = {});

/// run_generic_qdo with uniform random proposals.
Archive random_search(const Problem& problem, const NicheSet& niches,
                      const OptimizerConfig& config, const EvalSink& sink = {});

/// Model-based quality diversity: random-forest surrogates for the objective
/// and every feature, proposals by local mutation of the per-niche
/// incumbents maximizing the expected joint improvement of elites. Falls
/// back to a random proposal for an iteration whose surrogate fit fails.
Archive bop_elites_star(const Problem& problem, const NicheSet& niches,
                        const OptimizerConfig& config,
                        const EvalSink& sink = {});

/// Scalarizing multi-objective baseline: each iteration draws a weight
/// vector, scalarizes (objective, features) with the augmented Tchebycheff
/// function on archive-normalized values, fits one forest and mutates the
/// Pareto-optimal archive members maximizing expected improvement. Niches
/// are recorded for metrics only.
Archive parego_star(const Problem& problem, const NicheSet& niches,
                    const OptimizerConfig& config, const EvalSink& sink = {});

/// Evolutionary quality diversity: uniform initialization, then generations
/// of gene-wise mutations of uniformly drawn niche elites (no crossover).
Archive map_elites(const Problem& problem, const NicheSet& niches,
                   const OptimizerConfig& config, const EvalSink& sink = {});

struct EvolutionResult {
  std::optional<Configuration> best;
  std::optional<double> objective;
  Archive archive;
};

/// Aging evolution under one feasibility constraint: tournament parents from
/// a sampled pool, gene-wise mutation, oldest-out replacement. Infeasible
/// offspring are charged the penalty objective instead of being rejected, so
/// evaluation counts stay exact.
EvolutionResult regularized_evolution(const Problem& problem,
                                      const Niche& constraint,
                                      const OptimizerConfig& config,
                                      const EvalSink& sink = {});

}  // namespace qdopt

#endif  // QDOPT_OPTIMIZERS_HPP_
