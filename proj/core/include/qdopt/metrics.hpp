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

#ifndef QDOPT_METRICS_HPP_
#define QDOPT_METRICS_HPP_

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qdopt/archive.hpp"

namespace qdopt {

/// Step curve of (cumulative fidelity budget, metric value), budget strictly
/// increasing. Reads between steps carry the last value forward.
struct AnytimeCurve {
  std::vector<std::pair<double, double>> points;

  /// Last value at or before the budget; the first point's value before it.
  double value_at(double budget) const;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> values);

/// Sum of per-niche elite objectives, empty niches contributing the penalty.
double summed_niche_error(std::span<const std::optional<double>> elite_objectives,
                          double penalty);
double summed_niche_error(const Archive& archive, double penalty);

/// The summed-error step curve of a run, starting from the all-empty value
/// at budget zero and sampled at every evaluation's cumulative budget.
AnytimeCurve anytime_summed_error(const Archive& archive, double penalty);

/// Shared budget grid (sorted union of step budgets) for aggregation.
std::vector<double> merge_budget_grid(const std::vector<AnytimeCurve>& curves);

/// Mean and standard error over curves at each grid point, last value
/// carried forward.
std::vector<MeanSe> aggregate_curves(const std::vector<AnytimeCurve>& curves,
                                     const std::vector<double>& grid);

/// Pareto dominance for minimization: u no worse everywhere, strictly better
/// somewhere.
bool dominates(std::span<const double> u, std::span<const double> v);

/// Indices of the maximal non-dominated subset, in input order.
std::vector<std::size_t> pareto_front(
    const std::vector<std::vector<double>>& points);

/// Lebesgue measure of the region dominated by the points up to the nadir
/// (minimization). Points not weakly dominating the nadir are clipped out.
/// Supports 2 and 3 dimensions; throws std::invalid_argument otherwise.
double hypervolume(const std::vector<std::vector<double>>& points,
                   const std::vector<double>& nadir);

/// Per-point exclusive contribution: HV(front) - HV(front without the point).
std::vector<double> exclusive_hypervolume(
    const std::vector<std::vector<double>>& front,
    const std::vector<double>& nadir);

/// HV(reference front) - HV(run front), where the reference is the Pareto
/// front of the union of all runs.
double hypervolume_indicator(const std::vector<std::vector<double>>& run_front,
                             const std::vector<std::vector<double>>& reference_front,
                             const std::vector<double>& nadir);

/// COCO-style expected running time to reach `target` (metric value <=
/// target): unsuccessful runs contribute their full budget to the numerator
/// only. Empty when no run succeeds.
std::optional<double> expected_running_time(
    const std::vector<AnytimeCurve>& curves,
    const std::vector<double>& total_budgets, double target);

/// Fraction of replications whose final elites leave each niche empty.
std::vector<double> niche_miss_frequency(
    const std::vector<std::vector<bool>>& filled_per_replication);

}  // namespace qdopt

#endif  // QDOPT_METRICS_HPP_
