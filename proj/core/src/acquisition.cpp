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

#include "qdopt/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qdopt {

double normal_cdf(double z) {
  if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double expected_improvement(const Prediction& prediction, double f_min) {
  if (prediction.variance < kVarianceFloor) {
    return std::max(f_min - prediction.mean, 0.0);
  }
  const double sigma = std::sqrt(prediction.variance);
  const double z = (f_min - prediction.mean) / sigma;
  const double ei = (f_min - prediction.mean) * normal_cdf(z) + sigma * normal_pdf(z);
  return std::max(ei, 0.0);
}

double membership_probability(std::span<const Prediction> feature_predictions,
                              const Niche& niche) {
  if (feature_predictions.size() != niche.bounds.size()) {
    throw std::invalid_argument(
        "membership_probability: one prediction per feature bound required");
  }
  double p = 1.0;
  for (std::size_t i = 0; i < niche.bounds.size(); ++i) {
    const Prediction& pred = feature_predictions[i];
    const Interval& b = niche.bounds[i];
    if (pred.variance < kVarianceFloor) {
      if (!b.contains(pred.mean)) return 0.0;
      continue;
    }
    const double sigma = std::sqrt(pred.variance);
    const double hi = std::isinf(b.hi) ? 1.0 : normal_cdf((b.hi - pred.mean) / sigma);
    const double lo = std::isinf(b.lo) ? 0.0 : normal_cdf((b.lo - pred.mean) / sigma);
    p *= std::clamp(hi - lo, 0.0, 1.0);
  }
  return p;
}

double ejie(const Prediction& objective_prediction,
            std::span<const Prediction> feature_predictions,
            const NicheSet& niches,
            std::span<const std::optional<double>> f_min,
            double empty_niche_f_min) {
  double total = 0.0;
  for (std::size_t j = 0; j < niches.size(); ++j) {
    const double p = membership_probability(feature_predictions,
                                            niches.niches[j]);
    if (p <= 0.0) continue;
    const double best = f_min[j].value_or(empty_niche_f_min);
    total += p * expected_improvement(objective_prediction, best);
  }
  return total;
}

double ejie(const AcquisitionContext& context, std::span<const double> x) {
  const Prediction objective = context.objective_model->predict(x);
  std::vector<Prediction> feature_preds;
  feature_preds.reserve(context.feature_models.size());
  for (const RandomForest* model : context.feature_models) {
    feature_preds.push_back(model->predict(x));
  }
  return ejie(objective, feature_preds, *context.niches, context.f_min,
              context.empty_niche_f_min);
}

double scalarize_tchebycheff(std::span<const double> objectives,
                             std::span<const double> weights, double gamma) {
  if (objectives.size() != weights.size() || objectives.empty()) {
    throw std::invalid_argument("scalarize_tchebycheff: dimension mismatch");
  }
  double max_term = -std::numeric_limits<double>::infinity();
  double sum_term = 0.0;
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    const double w = weights[i] * objectives[i];
    max_term = std::max(max_term, w);
    sum_term += w;
  }
  return max_term + gamma * sum_term;
}

std::vector<std::vector<double>> weight_grid(int k, int s) {
  if (k < 2 || s < 1) {
    throw std::invalid_argument("weight_grid: requires k >= 2 and s >= 1");
  }
  std::vector<std::vector<double>> grid;
  std::vector<int> parts(k, 0);
  auto expand = [&](auto&& self, int dim, int remaining) -> void {
    if (dim == k - 1) {
      parts[dim] = remaining;
      std::vector<double> w(k);
      for (int i = 0; i < k; ++i) {
        w[i] = static_cast<double>(parts[i]) / static_cast<double>(s);
      }
      grid.push_back(std::move(w));
      return;
    }
    for (int l = 0; l <= remaining; ++l) {
      parts[dim] = l;
      self(self, dim + 1, remaining - l);
    }
  };
  expand(expand, 0, s);
  return grid;
}

int default_weight_granularity(int k) {
  if (k == 2) return 100;
  if (k == 3) return 13;
  for (int s = 1;; ++s) {
    double count = 1.0;
    for (int i = 1; i < k; ++i) {
      count *= static_cast<double>(s + i) / static_cast<double>(i);
    }
    if (count >= 100.0) return s;
  }
}

// ---------------------------------------------------------------------------
// Proposal optimizers
// ---------------------------------------------------------------------------

namespace {

std::vector<Configuration> rank_and_select(
    const std::function<double(const Configuration&)>& score,
    std::vector<Configuration> candidates, const SearchSpace& space,
    Rng& rng, int batch_size,
    const std::unordered_set<std::string>& archive_keys) {
  struct Scored {
    double value;
    std::size_t order;
  };
  std::vector<Scored> scored;
  std::vector<std::string> keys(candidates.size());
  scored.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    keys[i] = canonical_key(candidates[i], space);
    if (archive_keys.contains(keys[i])) continue;  // already evaluated
    scored.push_back({score(candidates[i]), i});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) {
                     return a.value > b.value;
                   });

  std::vector<Configuration> batch;
  std::unordered_set<std::string> batch_keys;
  for (const Scored& s : scored) {
    if (static_cast<int>(batch.size()) >= batch_size) break;
    if (!batch_keys.insert(keys[s.order]).second) continue;
    batch.push_back(candidates[s.order]);
  }

  // Dedup can starve the batch; top up with fresh uniform samples, accepting
  // a duplicate only after the attempt cap.
  constexpr int kTopUpAttempts = 100;
  while (static_cast<int>(batch.size()) < batch_size) {
    Configuration config = sample_random(space, rng);
    for (int attempt = 0; attempt < kTopUpAttempts; ++attempt) {
      const std::string key = canonical_key(config, space);
      if (!archive_keys.contains(key) && !batch_keys.contains(key)) break;
      config = sample_random(space, rng);
    }
    batch_keys.insert(canonical_key(config, space));
    batch.push_back(std::move(config));
  }
  return batch;
}

}  // namespace

std::vector<Configuration> propose_by_mutation(
    const std::function<double(const Configuration&)>& score,
    const std::vector<Configuration>& incumbents, const SearchSpace& space,
    int n_candidates, Rng& rng, int batch_size,
    const std::unordered_set<std::string>& archive_keys) {
  if (batch_size < 1 || n_candidates < batch_size) {
    throw std::invalid_argument(
        "propose_by_mutation: need n_candidates >= batch_size >= 1");
  }
  if (incumbents.empty()) {
    return propose_by_random_search(score, space, n_candidates, rng,
                                    batch_size, archive_keys);
  }

  std::vector<Configuration> candidates;
  candidates.reserve(n_candidates);
  const std::size_t m = incumbents.size();
  const int base = n_candidates / static_cast<int>(m);
  const int remainder = n_candidates % static_cast<int>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const int count = base + (static_cast<int>(i) < remainder ? 1 : 0);
    for (int c = 0; c < count; ++c) {
      try {
        candidates.push_back(mutate_local(incumbents[i], space, rng));
      } catch (const std::runtime_error&) {
        candidates.push_back(sample_random(space, rng));
      }
    }
  }
  return rank_and_select(score, std::move(candidates), space, rng, batch_size,
                         archive_keys);
}

std::vector<Configuration> propose_by_random_search(
    const std::function<double(const Configuration&)>& score,
    const SearchSpace& space, int n_candidates, Rng& rng, int batch_size,
    const std::unordered_set<std::string>& archive_keys) {
  if (batch_size < 1 || n_candidates < batch_size) {
    throw std::invalid_argument(
        "propose_by_random_search: need n_candidates >= batch_size >= 1");
  }
  std::vector<Configuration> candidates;
  candidates.reserve(n_candidates);
  for (int c = 0; c < n_candidates; ++c) {
    candidates.push_back(sample_random(space, rng));
  }
  return rank_and_select(score, std::move(candidates), space, rng, batch_size,
                         archive_keys);
}

}  // namespace qdopt
