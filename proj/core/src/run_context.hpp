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

// Shared run machinery for the full-fidelity and multifidelity optimizers:
// budget ledger, per-configuration feature cache, archive recording and
// trace emission. Internal header.

#ifndef QDOPT_SRC_RUN_CONTEXT_HPP_
#define QDOPT_SRC_RUN_CONTEXT_HPP_

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "qdopt/archive.hpp"
#include "qdopt/optimizers.hpp"
#include "qdopt/problems.hpp"

namespace qdopt::detail {

inline constexpr double kBudgetEps = 1e-9;

class RunContext {
 public:
  RunContext(const Problem& problem, NicheSet niches, double budget_units,
             EvalSink sink)
      : problem_(problem),
        archive_(std::move(niches), problem.reference_fidelity()),
        budget_units_(budget_units),
        sink_(std::move(sink)) {}

  /// Resumes the ledger of an existing archive.
  RunContext(const Problem& problem, Archive archive, double budget_units,
             EvalSink sink)
      : problem_(problem),
        archive_(std::move(archive)),
        budget_units_(budget_units),
        spent_(archive_.log().empty() ? 0.0 : archive_.log().back().budget),
        sink_(std::move(sink)) {
    for (const Evaluation& eval : archive_.log()) {
      keys_.insert(eval.key);
      feature_cache_.emplace(eval.key, eval.features);
    }
  }

  const Problem& problem() const { return problem_; }
  const SearchSpace& space() const { return problem_.space(); }
  const Archive& archive() const { return archive_; }
  Archive take_archive() && { return std::move(archive_); }

  double spent() const { return spent_; }
  double remaining() const { return budget_units_ - spent_; }
  bool can_afford(double cost) const {
    return cost <= remaining() + kBudgetEps;
  }

  const std::unordered_set<std::string>& archived_keys() const {
    return keys_;
  }

  std::string key_of(const Configuration& config) const {
    return canonical_key(config, problem_.space());
  }

  /// Features are fidelity-free; evaluate once per configuration and cache.
  const std::vector<double>& features_of(const Configuration& config,
                                         const std::string& key) {
    const auto it = feature_cache_.find(key);
    if (it != feature_cache_.end()) return it->second;
    return feature_cache_.emplace(key, problem_.features(config)).first->second;
  }

  double evaluate(const Configuration& config, double fidelity) {
    return record(config, fidelity, problem_.objective(config, fidelity));
  }

  /// Records an assigned objective (penalized infeasible offspring) without
  /// querying the problem; the fidelity cost is still charged.
  double record(const Configuration& config, double fidelity,
                double objective) {
    if (!can_afford(fidelity)) {
      throw std::logic_error("RunContext: evaluation past budget exhaustion");
    }
    const std::string key = key_of(config);
    Evaluation eval;
    eval.config = config;
    eval.key = key;
    eval.fidelity = fidelity;
    eval.objective = objective;
    eval.features = features_of(config, key);
    spent_ += fidelity;
    eval.budget = spent_;
    archive_.record(eval);
    keys_.insert(key);
    if (sink_) sink_(archive_.log().back());
    return objective;
  }

 private:
  const Problem& problem_;
  Archive archive_;
  double budget_units_;
  double spent_ = 0.0;
  EvalSink sink_;
  std::unordered_map<std::string, std::vector<double>> feature_cache_;
  std::unordered_set<std::string> keys_;
};

}  // namespace qdopt::detail

#endif  // QDOPT_SRC_RUN_CONTEXT_HPP_
