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

#include "qdopt/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qdopt/acquisition.hpp"
#include "qdopt/metrics.hpp"
#include "run_context.hpp"

namespace qdopt {

namespace {

using detail::RunContext;

int full_evaluation_budget(const OptimizerConfig& config,
                           const Problem& problem) {
  const double reference = problem.reference_fidelity();
  const double evals = config.budget_units / reference;
  const double rounded = std::round(evals);
  if (!(config.budget_units > 0.0) ||
      std::abs(evals - rounded) > 1e-9 || rounded < 1.0) {
    throw std::invalid_argument(
        "full-fidelity optimizers need a positive budget that is a multiple "
        "of the reference fidelity");
  }
  return static_cast<int>(rounded);
}

void log_note(const OptimizerConfig& config, const std::string& message) {
  if (config.log) config.log(message);
}

// Per-run engine for the full-fidelity loop with a pluggable proposal step.
Archive run_full_fidelity(
    const Problem& problem, const NicheSet& niches,
    const OptimizerConfig& config, const EvalSink& sink,
    const std::function<Configuration(RunContext&, Rng& sampler)>& propose) {
  const double reference = problem.reference_fidelity();
  const int n_total = full_evaluation_budget(config, problem);
  RunContext ctx(problem, niches, config.budget_units, sink);
  Rng sampler(config.seed, streams::kSampler);

  const int design = std::min(config.initial_design, n_total);
  for (int i = 0; i < design; ++i) {
    ctx.evaluate(sample_random(problem.space(), sampler), reference);
  }
  while (ctx.can_afford(reference)) {
    ctx.evaluate(propose(ctx, sampler), reference);
  }
  return std::move(ctx).take_archive();
}

}  // namespace

Archive run_generic_qdo(
    const std::function<Configuration(const Archive&, Rng&)>& propose,
    const Problem& problem, const NicheSet& niches,
    const OptimizerConfig& config, const EvalSink& sink) {
  return run_full_fidelity(problem, niches, config, sink,
                           [&](RunContext& ctx, Rng& sampler) {
                             return propose(ctx.archive(), sampler);
                           });
}

Archive random_search(const Problem& problem, const NicheSet& niches,
                      const OptimizerConfig& config, const EvalSink& sink) {
  return run_generic_qdo(
      [&problem](const Archive&, Rng& rng) {
        return sample_random(problem.space(), rng);
      },
      problem, niches, config, sink);
}

// ---------------------------------------------------------------------------
// BOP-Elites*
// ---------------------------------------------------------------------------

Archive bop_elites_star(const Problem& problem, const NicheSet& niches,
                        const OptimizerConfig& config, const EvalSink& sink) {
  if (config.initial_design < 2) {
    throw std::invalid_argument(
        "bop_elites_star: model-based optimizers need an initial design of "
        "at least 2");
  }
  const auto encoder = shared_encoder(problem.space());
  Rng model_rng(config.seed, streams::kModel);
  Rng proposal_rng(config.seed, streams::kProposal);
  const std::size_t n_features = problem.feature_names().size();

  auto propose = [&, encoder](RunContext& ctx, Rng& sampler) -> Configuration {
    const Archive& archive = ctx.archive();
    const auto& log = archive.log();
    if (log.size() < 2) {
      return sample_random(problem.space(), sampler);
    }
    try {
      std::vector<std::vector<double>> design;
      std::vector<double> objective_targets;
      design.reserve(log.size());
      objective_targets.reserve(log.size());
      for (const Evaluation& eval : log) {
        design.push_back(encoder->encode(eval.config));
        objective_targets.push_back(eval.objective);
      }
      const RandomForest objective_model =
          RandomForest::fit(design, objective_targets, config.forest, model_rng);
      std::vector<RandomForest> feature_models;
      feature_models.reserve(n_features);
      for (std::size_t i = 0; i < n_features; ++i) {
        std::vector<double> targets;
        targets.reserve(log.size());
        for (const Evaluation& eval : log) targets.push_back(eval.features[i]);
        feature_models.push_back(
            RandomForest::fit(design, targets, config.forest, model_rng));
      }

      AcquisitionContext acq;
      acq.objective_model = &objective_model;
      for (const RandomForest& model : feature_models) {
        acq.feature_models.push_back(&model);
      }
      acq.niches = &archive.niches();
      acq.empty_niche_f_min = problem.penalty();
      std::vector<Configuration> incumbents;
      for (std::size_t j = 0; j < archive.niches().size(); ++j) {
        acq.f_min.push_back(archive.elite_objective(j));
        if (const auto idx = archive.elite(j)) {
          incumbents.push_back(log[*idx].config);
        }
      }

      const auto score = [&](const Configuration& candidate) {
        return ejie(acq, encoder->encode(candidate));
      };
      const auto batch = propose_by_mutation(
          score, incumbents, problem.space(), config.n_candidates,
          proposal_rng, 1, ctx.archived_keys());
      return batch.front();
    } catch (const std::exception& e) {
      log_note(config, std::string("bop_elites_star: surrogate step failed (") +
                           e.what() + "); random proposal");
      return sample_random(problem.space(), sampler);
    }
  };
  return run_full_fidelity(problem, niches, config, sink, propose);
}

// ---------------------------------------------------------------------------
// ParEGO*
// ---------------------------------------------------------------------------

namespace {

// Min-max normalization of (objective, features...) rows over the archive;
// constant columns map to zero.
std::vector<std::vector<double>> normalized_objective_vectors(
    const std::vector<Evaluation>& log) {
  const std::size_t k = 1 + (log.empty() ? 0 : log.front().features.size());
  std::vector<std::vector<double>> raw;
  raw.reserve(log.size());
  for (const Evaluation& eval : log) {
    std::vector<double> v;
    v.reserve(k);
    v.push_back(eval.objective);
    v.insert(v.end(), eval.features.begin(), eval.features.end());
    raw.push_back(std::move(v));
  }
  std::vector<double> lo(k, std::numeric_limits<double>::infinity());
  std::vector<double> hi(k, -std::numeric_limits<double>::infinity());
  for (const auto& v : raw) {
    for (std::size_t i = 0; i < k; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  }
  for (auto& v : raw) {
    for (std::size_t i = 0; i < k; ++i) {
      v[i] = hi[i] > lo[i] ? (v[i] - lo[i]) / (hi[i] - lo[i]) : 0.0;
    }
  }
  return raw;
}

std::vector<std::vector<double>> raw_objective_vectors(
    const std::vector<Evaluation>& log) {
  std::vector<std::vector<double>> out;
  out.reserve(log.size());
  for (const Evaluation& eval : log) {
    std::vector<double> v;
    v.reserve(1 + eval.features.size());
    v.push_back(eval.objective);
    v.insert(v.end(), eval.features.begin(), eval.features.end());
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

Archive parego_star(const Problem& problem, const NicheSet& niches,
                    const OptimizerConfig& config, const EvalSink& sink) {
  if (config.initial_design < 2) {
    throw std::invalid_argument(
        "parego_star: model-based optimizers need an initial design of at "
        "least 2");
  }
  const auto encoder = shared_encoder(problem.space());
  const int k = 1 + static_cast<int>(problem.feature_names().size());
  const int s = config.parego_s > 0 ? config.parego_s
                                   : default_weight_granularity(k);
  const auto grid = weight_grid(k, s);
  Rng model_rng(config.seed, streams::kModel);
  Rng proposal_rng(config.seed, streams::kProposal);

  auto propose = [&, encoder](RunContext& ctx, Rng& sampler) -> Configuration {
    const Archive& archive = ctx.archive();
    const auto& log = archive.log();
    if (log.size() < 2) {
      return sample_random(problem.space(), sampler);
    }
    try {
      const auto& weights = grid[model_rng.index(grid.size())];
      const auto normalized = normalized_objective_vectors(log);
      std::vector<double> targets;
      targets.reserve(normalized.size());
      for (const auto& v : normalized) {
        targets.push_back(scalarize_tchebycheff(v, weights, config.parego_gamma));
      }
      std::vector<std::vector<double>> design;
      design.reserve(log.size());
      for (const Evaluation& eval : log) {
        design.push_back(encoder->encode(eval.config));
      }
      const RandomForest model =
          RandomForest::fit(design, targets, config.forest, model_rng);
      const double f_min = *std::min_element(targets.begin(), targets.end());

      std::vector<Configuration> pareto_configs;
      for (const std::size_t idx : pareto_front(raw_objective_vectors(log))) {
        pareto_configs.push_back(log[idx].config);
      }
      const auto score = [&](const Configuration& candidate) {
        return expected_improvement(model.predict(encoder->encode(candidate)),
                                    f_min);
      };
      const auto batch = propose_by_mutation(
          score, pareto_configs, problem.space(), config.n_candidates,
          proposal_rng, 1, ctx.archived_keys());
      return batch.front();
    } catch (const std::exception& e) {
      log_note(config, std::string("parego_star: surrogate step failed (") +
                           e.what() + "); random proposal");
      return sample_random(problem.space(), sampler);
    }
  };
  return run_full_fidelity(problem, niches, config, sink, propose);
}

// ---------------------------------------------------------------------------
// MAP-Elites
// ---------------------------------------------------------------------------

Archive map_elites(const Problem& problem, const NicheSet& niches,
                   const OptimizerConfig& config, const EvalSink& sink) {
  const double reference = problem.reference_fidelity();
  const int n_total = full_evaluation_budget(config, problem);
  RunContext ctx(problem, niches, config.budget_units, sink);
  Rng sampler(config.seed, streams::kSampler);
  Rng selector(config.seed, streams::kPromotion);
  Rng mutator(config.seed, streams::kProposal);

  const int population = std::min(std::max(1, config.population), n_total);
  for (int i = 0; i < population; ++i) {
    ctx.evaluate(sample_random(problem.space(), sampler), reference);
  }

  while (ctx.can_afford(reference)) {
    // Parents come from the elites as they stood at the start of the
    // generation.
    const Archive& archive = ctx.archive();
    std::vector<Configuration> parents;
    std::vector<std::size_t> occupied;
    for (std::size_t j = 0; j < archive.niches().size(); ++j) {
      if (archive.elite(j)) occupied.push_back(j);
    }
    const int generation =
        std::min<int>(population, static_cast<int>(ctx.remaining() / reference +
                                                   detail::kBudgetEps));
    for (int i = 0; i < generation; ++i) {
      if (occupied.empty()) {
        parents.push_back(sample_random(problem.space(), sampler));
      } else {
        const std::size_t niche = occupied[selector.index(occupied.size())];
        parents.push_back(archive.log()[*archive.elite(niche)].config);
      }
    }
    for (int i = 0; i < generation; ++i) {
      ctx.evaluate(
          mutate_genewise(parents[i], problem.space(), config.mutation_prob,
                          mutator),
          reference);
    }
  }
  return std::move(ctx).take_archive();
}

// ---------------------------------------------------------------------------
// Regularized evolution
// ---------------------------------------------------------------------------

EvolutionResult regularized_evolution(const Problem& problem,
                                      const Niche& constraint,
                                      const OptimizerConfig& config,
                                      const EvalSink& sink) {
  NicheSet single;
  single.name = problem.name();
  single.layout = NicheLayout::general;
  single.niches = {constraint};
  single.validate();

  const double reference = problem.reference_fidelity();
  const int n_total = full_evaluation_budget(config, problem);
  RunContext ctx(problem, single, config.budget_units, sink);
  Rng sampler(config.seed, streams::kSampler);
  Rng tournament(config.seed, streams::kPromotion);
  Rng mutator(config.seed, streams::kProposal);

  struct Member {
    Configuration config;
    double fitness;
  };
  std::deque<Member> population;
  const int pop_size = std::min(std::max(1, config.population), n_total);

  constexpr int kFeasibleSamplingCap = 1000;
  for (int i = 0; i < pop_size; ++i) {
    Configuration config_i = sample_random(problem.space(), sampler);
    int attempt = 0;
    while (!constraint.contains(
        ctx.features_of(config_i, ctx.key_of(config_i)))) {
      if (++attempt >= kFeasibleSamplingCap) {
        throw std::runtime_error(
            "regularized_evolution: no feasible initial population within "
            "the sampling cap");
      }
      config_i = sample_random(problem.space(), sampler);
    }
    population.push_back({config_i, ctx.evaluate(config_i, reference)});
  }

  const int children_per_generation = std::max(
      1, static_cast<int>(std::round(config.mutation_ratio * pop_size)));
  const int pool_size = std::clamp(
      static_cast<int>(std::ceil(config.parent_ratio * pop_size)), 1, pop_size);

  while (ctx.can_afford(reference)) {
    for (int c = 0; c < children_per_generation && ctx.can_afford(reference);
         ++c) {
      const auto pool =
          tournament.sample_without_replacement(population.size(), pool_size);
      std::size_t best = pool.front();
      for (const std::size_t i : pool) {
        if (population[i].fitness < population[best].fitness) best = i;
      }
      const Configuration child =
          mutate_genewise(population[best].config, problem.space(),
                          config.mutation_prob, mutator);
      const bool feasible =
          constraint.contains(ctx.features_of(child, ctx.key_of(child)));
      const double fitness =
          feasible ? ctx.evaluate(child, reference)
                   : ctx.record(child, reference, problem.penalty());
      population.push_back({child, fitness});
      population.pop_front();  // aging: the oldest member dies
    }
  }

  EvolutionResult result{std::nullopt, std::nullopt,
                         std::move(ctx).take_archive()};
  if (const auto idx = result.archive.elite(0)) {
    result.best = result.archive.log()[*idx].config;
    result.objective = result.archive.log()[*idx].objective;
  }
  return result;
}

}  // namespace qdopt
