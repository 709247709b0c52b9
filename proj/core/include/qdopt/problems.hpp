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

#ifndef QDOPT_PROBLEMS_HPP_
#define QDOPT_PROBLEMS_HPP_

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qdopt/archive.hpp"
#include "qdopt/space.hpp"

namespace qdopt {

/// A benchmark problem: an objective evaluable on a fidelity ladder plus
/// fidelity-free feature functions. Evaluations are pure.
class ProblemImpl {
 public:
  virtual ~ProblemImpl() = default;
  virtual const std::string& name() const = 0;
  virtual const SearchSpace& space() const = 0;
  virtual double objective(const Configuration& config, double fidelity) const = 0;
  virtual std::vector<double> features(const Configuration& config) const = 0;
  virtual const std::vector<double>& fidelity_ladder() const = 0;
  virtual const std::vector<std::string>& feature_names() const = 0;
  virtual double penalty() const { return 100.0; }
};

class Problem {
 public:
  explicit Problem(std::shared_ptr<const ProblemImpl> impl)
      : impl_(std::move(impl)) {}

  const std::string& name() const { return impl_->name(); }
  const SearchSpace& space() const { return impl_->space(); }
  double objective(const Configuration& config, double fidelity) const {
    return impl_->objective(config, fidelity);
  }
  std::vector<double> features(const Configuration& config) const {
    return impl_->features(config);
  }
  const std::vector<double>& fidelity_ladder() const {
    return impl_->fidelity_ladder();
  }
  double reference_fidelity() const { return impl_->fidelity_ladder().back(); }
  const std::vector<std::string>& feature_names() const {
    return impl_->feature_names();
  }
  double penalty() const { return impl_->penalty(); }

  std::optional<std::vector<Configuration>> enumerate() const {
    return enumerate_space(space());
  }

 private:
  std::shared_ptr<const ProblemImpl> impl_;
};

// Distinct tabular failure modes.
struct TabularSchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TabularDuplicateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TabularFidelityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TabularLookupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Loads a self-describing JSON table (space, ladder, rows).
Problem load_tabular(const std::string& path);

/// Loads a CSV table with columns `config`, `feat_<name>`..., `obj@<fid>`...
/// against an externally supplied space.
Problem load_tabular_csv(const std::string& path, const SearchSpace& space,
                         double penalty = 100.0, std::string name = "tabular");

/// Exports an enumerable problem as a tabular benchmark (one row per
/// canonical configuration, objectives at every ladder fidelity).
void export_tabular_csv(const Problem& problem, const std::string& path);
void export_tabular_json(const Problem& problem, const std::string& path);

/// Fully enumerable four-vertex cell benchmark with a smooth objective over
/// path structure, a size-like feature, and a mildly rank-breaking
/// low-fidelity bias. Deterministic and seedless.
Problem toy_cell_problem();

/// Percentile-based nested niches over the toy problem's feature values.
NicheSet toy_cell_niches(const Problem& problem,
                         const std::vector<double>& percentiles);

/// Multimodal continuous benchmark on [0,1]^dims whose feature is the first
/// coordinate; one basin per grid niche with a known closed-form optimum
/// 1 + 2*|;(2j-1)/(2c) - 0.5| in grid cell j.
Problem synthetic_continuous_problem(int dims, int c);

/// The matching disjoint grid niches over the first coordinate.
NicheSet synthetic_grid_niches(int c);

struct OracleEntry {
  std::optional<Configuration> config;  // a witness optimum
  std::optional<double> objective;      // empty niches report empty
};

/// Exhaustive reference-fidelity optimum per niche. Throws
/// std::invalid_argument for non-enumerable spaces.
std::vector<OracleEntry> brute_force_oracle(const Problem& problem,
                                            const NicheSet& niches);

}  // namespace qdopt

#endif  // QDOPT_PROBLEMS_HPP_
