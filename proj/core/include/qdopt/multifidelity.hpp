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

#ifndef QDOPT_MULTIFIDELITY_HPP_
#define QDOPT_MULTIFIDELITY_HPP_

#include <cstddef>
#include <functional>
#include <vector>

#include "qdopt/archive.hpp"
#include "qdopt/optimizers.hpp"
#include "qdopt/problems.hpp"
#include "qdopt/rng.hpp"

namespace qdopt {

struct HbStage {
  int size = 0;        // n_i
  double fidelity = 0; // r_i
};

struct HbBracket {
  int s = 0;        // bracket index, s_max down to 0
  int n = 0;        // initial configurations
  double eta = 0.0; // promotion keeps floor(n_i / eta) per stage
  std::vector<HbStage> stages;

  double cost() const;  // sum of n_i * r_i over the stages
};

struct HbSchedule {
  double max_fidelity = 0.0;
  double eta = 0.0;
  int s_max = 0;
  double total_resources = 0.0;  // B = (s_max + 1) * R
  std::vector<HbBracket> brackets;

  double total_cost() const;
};

enum class FidelityRounding {
  none,
  /// Round stage fidelities to the nearest positive integer, collapsing
  /// duplicates upward so stages stay strictly increasing.
  integer,
};

/// The bracket/stage table for maximum fidelity R and scaling factor eta:
/// s_max = floor(log_eta R), B = (s_max+1)R, per bracket
/// n = ceil((B/R) eta^s / (s+1)), r = R eta^{-s}, per stage
/// n_i = floor(n eta^{-i}), r_i = r eta^i.
HbSchedule compute_schedule(double R, double eta,
                            FidelityRounding rounding = FidelityRounding::integer);

/// Quality-diversity promotion: repeatedly draw a niche uniformly at random
/// and promote the best not-yet-promoted member of that niche; when the
/// drawn niche has none left, promote uniformly from the unpromoted pool.
/// Returns k_keep indices in promotion order.
std::vector<std::size_t> top_k_qdo(
    const std::vector<double>& objectives,
    const std::vector<std::vector<bool>>& memberships, std::size_t k_keep,
    Rng& rng);

/// Multi-objective promotion: non-dominated sorting, fronts filled in input
/// order, the splitting front ranked by exclusive hypervolume contribution.
/// The default reference point is the stage-wise component maxima plus a 1%
/// margin; pass one explicitly to override.
std::vector<std::size_t> top_k_mo(
    const std::vector<std::vector<double>>& objective_vectors,
    std::size_t k_keep, const std::vector<double>* reference = nullptr);

enum class PromotionPolicy { qdo, multi_objective, single_objective };

/// Yields the n configurations opening a bracket at the given stage-0
/// fidelity.
using HbSampler = std::function<std::vector<Configuration>(int n, double stage_fidelity)>;

/// Runs one Successive Halving bracket to completion against an archive:
/// features once per configuration, then stage-wise objective evaluations
/// and policy promotions. `cumulative_budget` is advanced by every
/// evaluation's fidelity. Intended for direct use and tests; the Hyperband
/// drivers below add budget truncation and bracket interleaving.
void run_sh_bracket(const Problem& problem, const HbBracket& bracket,
                    const HbSampler& sampler, PromotionPolicy policy,
                    Archive& archive, double& cumulative_budget,
                    Rng& promotion_rng, const EvalSink& sink = {});

/// Hyperband with uniform sampling and quality-diversity promotion. Repeats
/// the schedule until the budget is exhausted, truncating stage-wise so the
/// budget is never exceeded. Stages sharing a fidelity level run together
/// across brackets unless config.hb_sequential is set.
Archive qd_hyperband(const Problem& problem, const NicheSet& niches,
                     const OptimizerConfig& config, const EvalSink& sink = {});

/// qd_hyperband with bracket openings proposed in batch by maximizing the
/// expected joint improvement of elites under forest surrogates fitted on
/// all archive rows (fidelity as an input column, predictions at the
/// bracket's opening fidelity). Each proposal slot is drawn uniformly at
/// random with probability rho instead.
Archive bop_elites_hb(const Problem& problem, const NicheSet& niches,
                      const OptimizerConfig& config, const EvalSink& sink = {});

/// Hyperband with non-dominated-sorting promotion over (objective,
/// features). Niches are carried for bookkeeping only.
Archive mo_hyperband(const Problem& problem, const NicheSet& niches,
                     const OptimizerConfig& config, const EvalSink& sink = {});

/// mo_hyperband with bracket openings maximizing expected improvement of a
/// per-bracket Tchebycheff scalarization (fresh weights each proposal
/// round).
Archive parego_hb(const Problem& problem, const NicheSet& niches,
                  const OptimizerConfig& config, const EvalSink& sink = {});

}  // namespace qdopt

#endif  // QDOPT_MULTIFIDELITY_HPP_
