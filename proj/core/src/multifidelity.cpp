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

#include "qdopt/multifidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "qdopt/acquisition.hpp"
#include "qdopt/metrics.hpp"
#include "run_context.hpp"

namespace qdopt {

namespace {

constexpr double kEps = 1e-9;

double int_pow(double base, int exponent) {
  double out = 1.0;
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

}  // namespace

double HbBracket::cost() const {
  double total = 0.0;
  for (const HbStage& stage : stages) {
    total += static_cast<double>(stage.size) * stage.fidelity;
  }
  return total;
}

double HbSchedule::total_cost() const {
  double total = 0.0;
  for (const HbBracket& bracket : brackets) total += bracket.cost();
  return total;
}

HbSchedule compute_schedule(double R, double eta, FidelityRounding rounding) {
  if (!(eta > 1.0)) {
    throw std::invalid_argument("compute_schedule: eta must exceed 1");
  }
  if (!(R >= eta)) {
    throw std::invalid_argument("compute_schedule: R must be at least eta");
  }
  HbSchedule schedule;
  schedule.max_fidelity = R;
  schedule.eta = eta;
  int s_max = 0;
  while (int_pow(eta, s_max + 1) <= R * (1.0 + kEps)) ++s_max;
  schedule.s_max = s_max;
  schedule.total_resources = static_cast<double>(s_max + 1) * R;

  for (int s = s_max; s >= 0; --s) {
    HbBracket bracket;
    bracket.s = s;
    bracket.eta = eta;
    bracket.n = static_cast<int>(std::ceil(
        static_cast<double>(s_max + 1) * int_pow(eta, s) / (s + 1) - kEps));
    double previous_fidelity = 0.0;
    for (int i = 0; i <= s; ++i) {
      HbStage stage;
      stage.size =
          static_cast<int>(std::floor(bracket.n / int_pow(eta, i) + kEps));
      stage.fidelity = R / int_pow(eta, s - i);
      if (rounding == FidelityRounding::integer) {
        stage.fidelity = std::max(1.0, std::round(stage.fidelity));
        if (stage.fidelity <= previous_fidelity) {
          stage.fidelity = previous_fidelity + 1.0;  // collapse upward
        }
      }
      previous_fidelity = stage.fidelity;
      bracket.stages.push_back(stage);
    }
    schedule.brackets.push_back(std::move(bracket));
  }
  return schedule;
}

// ---------------------------------------------------------------------------
// Promotion policies
// ---------------------------------------------------------------------------

std::vector<std::size_t> top_k_qdo(
    const std::vector<double>& objectives,
    const std::vector<std::vector<bool>>& memberships, std::size_t k_keep,
    Rng& rng) {
  const std::size_t n = objectives.size();
  if (memberships.size() != n || k_keep > n) {
    throw std::invalid_argument("top_k_qdo: misaligned inputs");
  }
  if (n == 0 || k_keep == 0) return {};
  const std::size_t c = memberships.front().size();
  for (const auto& row : memberships) {
    if (row.size() != c) {
      throw std::invalid_argument("top_k_qdo: ragged membership rows");
    }
  }

  std::vector<bool> promoted(n, false);
  std::vector<std::size_t> out;
  out.reserve(k_keep);
  while (out.size() < k_keep) {
    const std::size_t niche = rng.index(c);
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (promoted[i] || !memberships[i][niche]) continue;
      if (best == n || objectives[i] < objectives[best]) best = i;
    }
    if (best == n) {
      // Nothing left in the drawn niche: any unpromoted configuration,
      // uniformly at random.
      std::size_t remaining = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!promoted[i]) ++remaining;
      }
      std::size_t pick = rng.index(remaining);
      for (std::size_t i = 0; i < n; ++i) {
        if (promoted[i]) continue;
        if (pick == 0) {
          best = i;
          break;
        }
        --pick;
      }
    }
    promoted[best] = true;
    out.push_back(best);
  }
  return out;
}

std::vector<std::size_t> top_k_mo(
    const std::vector<std::vector<double>>& objective_vectors,
    std::size_t k_keep, const std::vector<double>* reference_override) {
  const std::size_t n = objective_vectors.size();
  if (k_keep > n) {
    throw std::invalid_argument("top_k_mo: k_keep exceeds the candidate count");
  }
  if (n == 0 || k_keep == 0) return {};
  const std::size_t dim = objective_vectors.front().size();

  // Reference point for contribution ranking: stage-wise component maxima
  // plus a 1% margin, unless overridden.
  std::vector<double> reference(dim, 0.0);
  if (reference_override != nullptr) {
    reference = *reference_override;
  } else if (dim >= 2) {
    std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
    for (const auto& v : objective_vectors) {
      for (std::size_t d = 0; d < dim; ++d) {
        lo[d] = std::min(lo[d], v[d]);
        hi[d] = std::max(hi[d], v[d]);
      }
    }
    for (std::size_t d = 0; d < dim; ++d) {
      const double span = hi[d] - lo[d];
      reference[d] = hi[d] + 0.01 * (span > 0 ? span : 1.0);
    }
  }

  std::vector<std::size_t> out;
  out.reserve(k_keep);
  std::vector<std::size_t> remaining(n);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = i;

  while (out.size() < k_keep) {
    std::vector<std::vector<double>> points;
    points.reserve(remaining.size());
    for (const std::size_t i : remaining) points.push_back(objective_vectors[i]);
    const std::vector<std::size_t> front = pareto_front(points);

    if (out.size() + front.size() <= k_keep) {
      std::vector<bool> in_front(remaining.size(), false);
      for (const std::size_t fi : front) {
        out.push_back(remaining[fi]);
        in_front[fi] = true;
      }
      std::vector<std::size_t> next;
      for (std::size_t i = 0; i < remaining.size(); ++i) {
        if (!in_front[i]) next.push_back(remaining[i]);
      }
      remaining = std::move(next);
      continue;
    }

    // Splitting front: exclusive hypervolume contribution, largest first,
    // input order on ties. 1-D vectors are all equal within a front.
    std::vector<std::vector<double>> front_points;
    front_points.reserve(front.size());
    for (const std::size_t fi : front) front_points.push_back(points[fi]);
    std::vector<double> contribution(front.size(), 0.0);
    if (dim >= 2) {
      contribution = exclusive_hypervolume(front_points, reference);
    }
    std::vector<std::size_t> order(front.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return contribution[a] > contribution[b];
                     });
    for (const std::size_t oi : order) {
      if (out.size() >= k_keep) break;
      out.push_back(remaining[front[oi]]);
    }
    break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Successive Halving machinery
// ---------------------------------------------------------------------------

namespace {

using detail::RunContext;

std::vector<std::size_t> promote(PromotionPolicy policy,
                                 const std::vector<double>& objectives,
                                 const std::vector<std::vector<double>>& features,
                                 const std::vector<std::vector<bool>>& memberships,
                                 std::size_t k, Rng& promotion_rng) {
  switch (policy) {
    case PromotionPolicy::qdo:
      return top_k_qdo(objectives, memberships, k, promotion_rng);
    case PromotionPolicy::multi_objective: {
      std::vector<std::vector<double>> vectors;
      vectors.reserve(objectives.size());
      for (std::size_t i = 0; i < objectives.size(); ++i) {
        std::vector<double> v;
        v.reserve(1 + features[i].size());
        v.push_back(objectives[i]);
        v.insert(v.end(), features[i].begin(), features[i].end());
        vectors.push_back(std::move(v));
      }
      return top_k_mo(vectors, k);
    }
    case PromotionPolicy::single_objective: {
      std::vector<std::size_t> order(objectives.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return objectives[a] < objectives[b];
                       });
      order.resize(std::min(k, order.size()));
      return order;
    }
  }
  return {};
}

// One bracket's in-flight state across its stages.
struct BracketRun {
  const HbBracket* bracket = nullptr;
  int next_stage = 0;
  std::vector<Configuration> configs;
  std::vector<std::vector<double>> features;
  std::vector<std::vector<bool>> memberships;

  bool done() const { return next_stage >= static_cast<int>(bracket->stages.size()); }
};

// Runs the bracket's next stage. Returns false (without evaluating) when the
// remaining budget cannot afford the whole stage.
bool run_stage(BracketRun& run, RunContext& ctx, const HbSampler& sampler,
               PromotionPolicy policy, Rng& promotion_rng) {
  const HbStage& stage = run.bracket->stages[run.next_stage];
  const double stage_cost =
      static_cast<double>(stage.size) * stage.fidelity;
  if (!ctx.can_afford(stage_cost)) return false;

  if (run.next_stage == 0) {
    run.configs = sampler(run.bracket->n, stage.fidelity);
    if (static_cast<int>(run.configs.size()) != run.bracket->n) {
      throw std::logic_error("run_stage: sampler returned a wrong batch size");
    }
    // Feature functions once per configuration; membership is
    // fidelity-independent.
    run.features.clear();
    run.memberships.clear();
    for (const Configuration& config : run.configs) {
      const auto& f = ctx.features_of(config, ctx.key_of(config));
      run.features.push_back(f);
      run.memberships.push_back(membership(f, ctx.archive().niches()));
    }
  }
  if (static_cast<int>(run.configs.size()) != stage.size) {
    throw std::logic_error("run_stage: stage size drifted from the schedule");
  }

  std::vector<double> objectives;
  objectives.reserve(run.configs.size());
  for (const Configuration& config : run.configs) {
    objectives.push_back(ctx.evaluate(config, stage.fidelity));
  }

  // floor(n_i / eta) survivors; on generated tables that is exactly the next
  // stage's size, which also keeps hand-built brackets (e.g. all-ones)
  // consistent.
  const bool has_next =
      run.next_stage + 1 < static_cast<int>(run.bracket->stages.size());
  const std::size_t keep = std::min<std::size_t>(
      has_next ? static_cast<std::size_t>(
                     run.bracket->stages[run.next_stage + 1].size)
               : static_cast<std::size_t>(std::floor(
                     static_cast<double>(stage.size) / run.bracket->eta + kEps)),
      run.configs.size());
  const std::vector<std::size_t> selected = promote(
      policy, objectives, run.features, run.memberships, keep, promotion_rng);

  std::vector<Configuration> next_configs;
  std::vector<std::vector<double>> next_features;
  std::vector<std::vector<bool>> next_memberships;
  for (const std::size_t i : selected) {
    next_configs.push_back(run.configs[i]);
    next_features.push_back(run.features[i]);
    next_memberships.push_back(run.memberships[i]);
  }
  run.configs = std::move(next_configs);
  run.features = std::move(next_features);
  run.memberships = std::move(next_memberships);
  ++run.next_stage;
  return true;
}

// ---------------------------------------------------------------------------
// Bracket-opening samplers
// ---------------------------------------------------------------------------

enum class HbKind { uniform, ejie, parego };

struct HbState {
  const OptimizerConfig* config = nullptr;
  std::shared_ptr<const Encoder> encoder;
  Rng sampler_rng;
  Rng model_rng;
  Rng proposal_rng;
  Rng promotion_rng;
  Rng rho_rng;
  std::vector<std::vector<double>> parego_grid;

  HbState(const OptimizerConfig& cfg, std::uint64_t seed)
      : config(&cfg),
        sampler_rng(seed, streams::kSampler),
        model_rng(seed, streams::kModel),
        proposal_rng(seed, streams::kProposal),
        promotion_rng(seed, streams::kPromotion),
        rho_rng(seed, streams::kRho) {}
};

std::vector<Configuration> sample_uniform(int n, RunContext& ctx,
                                          HbState& state) {
  std::vector<Configuration> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.push_back(sample_random(ctx.problem().space(), state.sampler_rng));
  }
  return out;
}

// Surrogate design matrix over all archive rows: encoding plus the fidelity
// as the last input column.
std::vector<std::vector<double>> multifidelity_design(
    const std::vector<Evaluation>& log, const Encoder& encoder) {
  std::vector<std::vector<double>> design;
  design.reserve(log.size());
  for (const Evaluation& eval : log) {
    std::vector<double> x = encoder.encode(eval.config);
    x.push_back(eval.fidelity);
    design.push_back(std::move(x));
  }
  return design;
}

// Fills the non-random slots of a bracket opening from a ranked model batch;
// the rest are uniform draws on the sampler stream.
std::vector<Configuration> assemble_slots(
    int n, const std::vector<bool>& random_slot,
    const std::vector<Configuration>& model_batch, RunContext& ctx,
    HbState& state) {
  std::vector<Configuration> out;
  out.reserve(n);
  std::size_t next_model = 0;
  for (int i = 0; i < n; ++i) {
    if (random_slot[i]) {
      out.push_back(sample_random(ctx.problem().space(), state.sampler_rng));
    } else {
      out.push_back(model_batch.at(next_model++));
    }
  }
  return out;
}

std::vector<Configuration> sample_bracket_model(int n, double stage_fidelity,
                                                RunContext& ctx, HbState& state,
                                                HbKind kind) {
  const OptimizerConfig& cfg = *state.config;
  const auto& log = ctx.archive().log();
  if (log.size() < static_cast<std::size_t>(std::max(2, cfg.initial_design))) {
    return sample_uniform(n, ctx, state);  // cold start
  }

  std::vector<bool> random_slot(n, false);
  int model_slots = 0;
  for (int i = 0; i < n; ++i) {
    random_slot[i] = state.rho_rng.bernoulli(cfg.rho);
    if (!random_slot[i]) ++model_slots;
  }
  if (model_slots == 0) {
    return assemble_slots(n, random_slot, {}, ctx, state);
  }

  try {
    const Encoder& encoder = *state.encoder;
    const auto design = multifidelity_design(log, encoder);
    const NicheSet& niches = ctx.archive().niches();

    std::function<double(const Configuration&)> score;
    RandomForest objective_model;
    std::vector<RandomForest> feature_models;
    AcquisitionContext acq;
    RandomForest scalar_model;
    double scalar_f_min = 0.0;
    std::vector<Configuration> incumbents;

    if (kind == HbKind::ejie) {
      std::vector<double> targets;
      targets.reserve(log.size());
      for (const Evaluation& eval : log) targets.push_back(eval.objective);
      objective_model =
          RandomForest::fit(design, targets, cfg.forest, state.model_rng);
      const std::size_t n_features = log.front().features.size();
      for (std::size_t f = 0; f < n_features; ++f) {
        std::vector<double> feature_targets;
        feature_targets.reserve(log.size());
        for (const Evaluation& eval : log) {
          feature_targets.push_back(eval.features[f]);
        }
        feature_models.push_back(RandomForest::fit(design, feature_targets,
                                                   cfg.forest, state.model_rng));
      }
      acq.objective_model = &objective_model;
      for (const RandomForest& model : feature_models) {
        acq.feature_models.push_back(&model);
      }
      acq.niches = &niches;
      acq.empty_niche_f_min = ctx.problem().penalty();
      // Per-niche best observed at any fidelity; its configuration seeds the
      // mutations.
      acq.f_min.assign(niches.size(), std::nullopt);
      std::vector<std::optional<std::size_t>> best_row(niches.size());
      for (std::size_t r = 0; r < log.size(); ++r) {
        const std::vector<bool> member = membership(log[r].features, niches);
        for (std::size_t j = 0; j < niches.size(); ++j) {
          if (!member[j]) continue;
          if (!acq.f_min[j] || log[r].objective < *acq.f_min[j]) {
            acq.f_min[j] = log[r].objective;
            best_row[j] = r;
          }
        }
      }
      for (const auto& row : best_row) {
        if (row) incumbents.push_back(log[*row].config);
      }
      score = [&acq, &encoder, stage_fidelity](const Configuration& candidate) {
        std::vector<double> x = encoder.encode(candidate);
        x.push_back(stage_fidelity);
        return ejie(acq, x);
      };
    } else {
      // Fresh scalarization weights per proposal round.
      const int k = 1 + static_cast<int>(log.front().features.size());
      if (state.parego_grid.empty()) {
        const int s = cfg.parego_s > 0 ? cfg.parego_s
                                       : default_weight_granularity(k);
        state.parego_grid = weight_grid(k, s);
      }
      const auto& weights =
          state.parego_grid[state.model_rng.index(state.parego_grid.size())];

      std::vector<std::vector<double>> raw;
      raw.reserve(log.size());
      std::vector<double> lo(k, std::numeric_limits<double>::infinity());
      std::vector<double> hi(k, -std::numeric_limits<double>::infinity());
      for (const Evaluation& eval : log) {
        std::vector<double> v;
        v.reserve(k);
        v.push_back(eval.objective);
        v.insert(v.end(), eval.features.begin(), eval.features.end());
        for (int d = 0; d < k; ++d) {
          lo[d] = std::min(lo[d], v[d]);
          hi[d] = std::max(hi[d], v[d]);
        }
        raw.push_back(std::move(v));
      }
      std::vector<double> targets;
      targets.reserve(raw.size());
      for (auto v : raw) {
        for (int d = 0; d < k; ++d) {
          v[d] = hi[d] > lo[d] ? (v[d] - lo[d]) / (hi[d] - lo[d]) : 0.0;
        }
        targets.push_back(scalarize_tchebycheff(v, weights, cfg.parego_gamma));
      }
      scalar_model =
          RandomForest::fit(design, targets, cfg.forest, state.model_rng);
      scalar_f_min = *std::min_element(targets.begin(), targets.end());
      for (const std::size_t idx : pareto_front(raw)) {
        incumbents.push_back(log[idx].config);
      }
      score = [&scalar_model, &encoder, scalar_f_min,
               stage_fidelity](const Configuration& candidate) {
        std::vector<double> x = encoder.encode(candidate);
        x.push_back(stage_fidelity);
        return expected_improvement(scalar_model.predict(x), scalar_f_min);
      };
    }

    const int n_candidates = std::max(cfg.n_candidates, model_slots);
    const std::vector<Configuration> model_batch = propose_by_mutation(
        score, incumbents, ctx.problem().space(), n_candidates,
        state.proposal_rng, model_slots, ctx.archived_keys());
    return assemble_slots(n, random_slot, model_batch, ctx, state);
  } catch (const std::exception& e) {
    if (cfg.log) {
      cfg.log(std::string("hyperband: surrogate step failed (") + e.what() +
              "); random bracket");
    }
    return sample_uniform(n, ctx, state);
  }
}

// ---------------------------------------------------------------------------
// Hyperband driver
// ---------------------------------------------------------------------------

Archive run_hyperband(const Problem& problem, const NicheSet& niches,
                      const OptimizerConfig& config, const EvalSink& sink,
                      PromotionPolicy policy, HbKind kind) {
  if (!(config.budget_units > 0.0)) {
    throw std::invalid_argument("hyperband: budget must be positive");
  }
  const HbSchedule schedule = compute_schedule(
      problem.reference_fidelity(), config.eta, FidelityRounding::integer);
  RunContext ctx(problem, niches, config.budget_units, sink);
  HbState state(config, config.seed);
  if (kind != HbKind::uniform) {
    state.encoder = shared_encoder(problem.space());
  }

  HbSampler sampler = [&](int n, double stage_fidelity) {
    if (kind == HbKind::uniform) return sample_uniform(n, ctx, state);
    return sample_bracket_model(n, stage_fidelity, ctx, state, kind);
  };

  // Task order of one schedule pass. Default groups stages of equal
  // fidelity level across brackets; the classic ordering runs brackets to
  // completion one after another.
  struct Task {
    std::size_t bracket;
    int stage;
  };
  std::vector<Task> order;
  for (std::size_t b = 0; b < schedule.brackets.size(); ++b) {
    for (int i = 0; i < static_cast<int>(schedule.brackets[b].stages.size());
         ++i) {
      order.push_back({b, i});
    }
  }
  if (!config.hb_sequential) {
    std::stable_sort(order.begin(), order.end(),
                     [](const Task& a, const Task& b) {
                       return a.stage + static_cast<int>(a.bracket) <
                              b.stage + static_cast<int>(b.bracket);
                     });
  }

  bool exhausted = false;
  while (!exhausted) {
    std::vector<BracketRun> runs(schedule.brackets.size());
    for (std::size_t b = 0; b < schedule.brackets.size(); ++b) {
      runs[b].bracket = &schedule.brackets[b];
    }
    for (const Task& task : order) {
      if (!run_stage(runs[task.bracket], ctx, sampler, policy,
                     state.promotion_rng)) {
        exhausted = true;  // stage-wise truncation, budget never exceeded
        break;
      }
    }
  }
  return std::move(ctx).take_archive();
}

}  // namespace

void run_sh_bracket(const Problem& problem, const HbBracket& bracket,
                    const HbSampler& sampler, PromotionPolicy policy,
                    Archive& archive, double& cumulative_budget,
                    Rng& promotion_rng, const EvalSink& sink) {
  RunContext ctx(problem, std::move(archive),
                 std::numeric_limits<double>::infinity(), sink);
  BracketRun run;
  run.bracket = &bracket;
  while (!run.done()) {
    run_stage(run, ctx, sampler, policy, promotion_rng);
  }
  cumulative_budget = ctx.spent();
  archive = std::move(ctx).take_archive();
}

Archive qd_hyperband(const Problem& problem, const NicheSet& niches,
                     const OptimizerConfig& config, const EvalSink& sink) {
  return run_hyperband(problem, niches, config, sink, PromotionPolicy::qdo,
                       HbKind::uniform);
}

Archive bop_elites_hb(const Problem& problem, const NicheSet& niches,
                      const OptimizerConfig& config, const EvalSink& sink) {
  return run_hyperband(problem, niches, config, sink, PromotionPolicy::qdo,
                       HbKind::ejie);
}

Archive mo_hyperband(const Problem& problem, const NicheSet& niches,
                     const OptimizerConfig& config, const EvalSink& sink) {
  return run_hyperband(problem, niches, config, sink,
                       PromotionPolicy::multi_objective, HbKind::uniform);
}

Archive parego_hb(const Problem& problem, const NicheSet& niches,
                  const OptimizerConfig& config, const EvalSink& sink) {
  return run_hyperband(problem, niches, config, sink,
                       PromotionPolicy::multi_objective, HbKind::parego);
}

}  // namespace qdopt
