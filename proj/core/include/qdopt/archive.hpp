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

#ifndef QDOPT_ARCHIVE_HPP_
#define QDOPT_ARCHIVE_HPP_

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qdopt/space.hpp"

namespace qdopt {

/// Half-open feature interval [lo, hi); lo may be -inf, hi may be +inf.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double z) const { return lo <= z && z < hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// A feature-space niche: one interval per feature function.
struct Niche {
  int id = 0;
  std::vector<Interval> bounds;

  bool contains(const std::vector<double>& features) const;

  friend bool operator==(const Niche&, const Niche&) = default;
};

enum class NicheLayout { nested, disjoint, general };

struct NicheSet {
  std::string name;
  NicheLayout layout = NicheLayout::general;
  std::vector<Niche> niches;

  std::size_t size() const { return niches.size(); }

  /// Checks interval validity plus the layout claim (strict nesting chain or
  /// pairwise-disjoint intervals). Throws std::invalid_argument.
  void validate() const;
};

/// Per-niche membership of a feature vector, in niche order.
std::vector<bool> membership(const std::vector<double>& features,
                             const NicheSet& niches);

std::string niche_set_to_json(const NicheSet& niches);
NicheSet niche_set_from_json(const std::string& json_text);

/// Nested niches [0, q_p) for each percentile plus a final [0, inf) niche.
/// Quantiles use linear interpolation between order statistics; an upper
/// bound that lands exactly on a sample is nudged to the next double so the
/// half-open interval keeps the intended mass.
NicheSet niches_from_percentiles(std::vector<double> feature_samples,
                                 const std::vector<double>& percentiles);

/// One evaluated configuration.
struct Evaluation {
  Configuration config;
  std::string key;  // canonical identity, used for caching and dedup
  double fidelity = 0.0;
  double objective = 0.0;
  std::vector<double> features;
  std::uint64_t index = 0;  // assigned by Archive::record
  double budget = 0.0;      // cumulative fidelity units after this evaluation
};

/// Append-only evaluation log plus per-niche elites.
///
/// Elites are keyed to the reference (maximum) fidelity: lower-fidelity
/// observations are logged but never occupy an elite slot. Replacement is
/// strict improvement, so the first-observed evaluation wins ties.
class Archive {
 public:
  Archive(NicheSet niches, double reference_fidelity);

  /// Appends the evaluation and updates the elites of every niche the
  /// evaluation's features fall in (reference fidelity only).
  void record(Evaluation eval);

  const NicheSet& niches() const { return niches_; }
  double reference_fidelity() const { return reference_fidelity_; }
  const std::vector<Evaluation>& log() const { return log_; }

  std::optional<std::size_t> elite(std::size_t niche) const {
    return elites_.at(niche);
  }
  std::optional<double> elite_objective(std::size_t niche) const;
  std::size_t filled_niches() const;

 private:
  NicheSet niches_;
  double reference_fidelity_;
  std::vector<Evaluation> log_;
  std::vector<std::optional<std::size_t>> elites_;
};

}  // namespace qdopt

#endif  // QDOPT_ARCHIVE_HPP_
