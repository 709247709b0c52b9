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

#ifndef QDOPT_ACQUISITION_HPP_
#define QDOPT_ACQUISITION_HPP_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "qdopt/archive.hpp"
#include "qdopt/rng.hpp"
#include "qdopt/space.hpp"
#include "qdopt/surrogate.hpp"

namespace qdopt {

/// Variances below this are treated as deterministic predictions inside
/// acquisition computations (never in stored predictions).
inline constexpr double kVarianceFloor = 1e-12;

double normal_cdf(double z);
double normal_pdf(double z);

/// Closed-form expected improvement under a Normal(mean, variance) belief:
/// E[max(f_min - y, 0)]. Degenerates to max(f_min - mean, 0) below the
/// variance floor.
double expected_improvement(const Prediction& prediction, double f_min);

/// Probability that independent Normal feature beliefs fall inside the
/// niche: prod_i P(lo_i <= Z_i < hi_i).
double membership_probability(std::span<const Prediction> feature_predictions,
                              const Niche& niche);

/// Inputs for the expected joint improvement of elites.
struct AcquisitionContext {
  const RandomForest* objective_model = nullptr;
  std::vector<const RandomForest*> feature_models;  // one per feature
  const NicheSet* niches = nullptr;
  std::vector<std::optional<double>> f_min;  // best observed per niche
  double empty_niche_f_min = 100.0;          // stands in for empty niches
};

/// Sum over niches of membership probability times per-niche expected
/// improvement, on explicit predictions.
double ejie(const Prediction& objective_prediction,
            std::span<const Prediction> feature_predictions,
            const NicheSet& niches,
            std::span<const std::optional<double>> f_min,
            double empty_niche_f_min);

/// Model-backed form: predictions come from the context's forests. The input
/// vector must match the models' training layout (including any fidelity
/// column).
double ejie(const AcquisitionContext& context, std::span<const double> x);

/// Augmented Tchebycheff scalarization max_i(w_i f_i) + gamma sum_i w_i f_i.
double scalarize_tchebycheff(std::span<const double> objectives,
                             std::span<const double> weights, double gamma);

/// All weight vectors with components l/s summing to 1, in ascending
/// first-component order; C(s+k-1, k-1) vectors.
std::vector<std::vector<double>> weight_grid(int k, int s);

/// Default weight granularity per objective count: 100 for two objectives,
/// 13 for three, otherwise the smallest s whose grid reaches 100 vectors.
int default_weight_granularity(int k);

/// Candidate proposal by local mutation of incumbents: n_candidates
/// mutations spread evenly over the incumbents (remainder to the earlier
/// ones), scored, deduplicated against archived keys and within the batch,
/// top batch_size returned by descending score with stable ties. Falls back
/// to uniform sampling when there are no incumbents.
std::vector<Configuration> propose_by_mutation(
    const std::function<double(const Configuration&)>& score,
    const std::vector<Configuration>& incumbents, const SearchSpace& space,
    int n_candidates, Rng& rng, int batch_size,
    const std::unordered_set<std::string>& archive_keys);

/// As propose_by_mutation with uniform random candidate generation.
std::vector<Configuration> propose_by_random_search(
    const std::function<double(const Configuration&)>& score,
    const SearchSpace& space, int n_candidates, Rng& rng, int batch_size,
    const std::unordered_set<std::string>& archive_keys);

}  // namespace qdopt

#endif  // QDOPT_ACQUISITION_HPP_
