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

#ifndef QDOPT_SPACE_HPP_
#define QDOPT_SPACE_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qdopt/rng.hpp"

namespace qdopt {

// ---------------------------------------------------------------------------
// Cell search spaces: upper-triangular DAGs over a fixed vertex budget, with
// an operation label on every internal vertex. Vertex 0 is the input, vertex
// num_vertices-1 the output.
// ---------------------------------------------------------------------------

struct CellSpace {
  int max_vertices = 7;
  int max_edges = 9;
  std::vector<std::string> op_vocabulary;
  // Number of most-likely path templates kept by the one-hot path encoding.
  int path_truncation_length = 64;

  void validate() const;  // throws std::invalid_argument on a bad space
};

struct CellConfig {
  int num_vertices = 0;
  // Row-major num_vertices x num_vertices matrix; only entries above the
  // diagonal are meaningful, which makes every configuration a DAG.
  std::vector<std::uint8_t> adjacency;
  // One op-vocabulary index per internal vertex (vertices 1..num_vertices-2).
  std::vector<int> ops;

  bool edge(int i, int j) const {
    return adjacency[static_cast<std::size_t>(i) * num_vertices + j] != 0;
  }
  void set_edge(int i, int j, bool present) {
    adjacency[static_cast<std::size_t>(i) * num_vertices + j] = present ? 1 : 0;
  }
  int edge_count() const;

  friend bool operator==(const CellConfig&, const CellConfig&) = default;
};

/// True iff at least one directed input->output path exists.
bool has_input_output_path(const CellConfig& config);

/// True iff the config satisfies the space's edge budget and connectivity.
bool cell_is_valid(const CellConfig& config, const CellSpace& space);

/// Removes vertices that lie on no input->output path and reindexes the
/// survivors. The result is the canonical structure used by encodings,
/// serialization and evaluation, so dead-code variants of a cell collapse.
CellConfig prune(const CellConfig& config);

/// All distinct input->output paths as sequences of internal-vertex op
/// indices, in depth-first order with ascending successors. The direct
/// input->output edge contributes the empty sequence.
std::vector<std::vector<int>> enumerate_paths(const CellConfig& config);

// ---------------------------------------------------------------------------
// Generic mixed parameter spaces.
// ---------------------------------------------------------------------------

struct CategoricalDim {
  std::string name;
  std::vector<std::string> labels;
};

struct IntDim {
  std::string name;
  std::int64_t lo = 0;
  std::int64_t hi = 0;  // inclusive
};

struct RealDim {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
};

using ParamDim = std::variant<CategoricalDim, IntDim, RealDim>;

struct ParamSpace {
  std::vector<ParamDim> dims;

  void validate() const;
};

// Categorical dims store the label index, integer dims the value, real dims
// the coordinate.
using ParamValue = std::variant<int, std::int64_t, double>;

struct ParamConfig {
  std::vector<ParamValue> values;

  friend bool operator==(const ParamConfig&, const ParamConfig&) = default;
};

bool param_is_valid(const ParamConfig& config, const ParamSpace& space);

// ---------------------------------------------------------------------------
// Space-generic surface used by optimizers and problems.
// ---------------------------------------------------------------------------

using SearchSpace = std::variant<CellSpace, ParamSpace>;
using Configuration = std::variant<CellConfig, ParamConfig>;

void validate(const SearchSpace& space);
bool is_valid(const Configuration& config, const SearchSpace& space);

/// Uniform sampling with rejection repair of invalid cells. Throws
/// std::runtime_error when the repair cap is exceeded (over-constrained
/// space).
Configuration sample_random(const SearchSpace& space, Rng& rng);

/// One local edit: a single adjacency toggle or op relabel for cells, a
/// single dimension resampled to a different value for parameter spaces.
/// Never returns the input. Throws std::runtime_error when no valid
/// neighbour is found within the rejection cap.
Configuration mutate_local(const Configuration& config,
                           const SearchSpace& space, Rng& rng);

/// Independent per-gene mutation with probability p per gene (adjacency
/// entries and op labels for cells, dimensions for parameter spaces), with
/// validity repair by rejection. May return the input when no gene fires.
Configuration mutate_genewise(const Configuration& config,
                              const SearchSpace& space, double p, Rng& rng);

/// Canonical JSON identity of a configuration (pruned for cells, values by
/// dimension name for parameter spaces). Equal strings identify equal
/// configurations up to dead-code pruning.
std::string canonical_key(const Configuration& config,
                          const SearchSpace& space);

Configuration configuration_from_json(const std::string& json_text,
                                      const SearchSpace& space);

std::string space_to_json(const SearchSpace& space);
SearchSpace space_from_json(const std::string& json_text);

/// Exhaustive listing of every valid raw configuration. Empty when the space
/// is not enumerable (real dimensions) or exceeds the cap.
std::optional<std::vector<Configuration>> enumerate_space(
    const SearchSpace& space, std::size_t cap = 1u << 20);

// ---------------------------------------------------------------------------
// Fixed-length numeric encodings.
// ---------------------------------------------------------------------------

/// Deterministic configuration -> vector encoder for one space.
///
/// Cells use a truncated one-hot path encoding: the universe is the
/// path_truncation_length most-likely path templates, ranked once per space
/// by their presence probability under uniform random cell sampling
/// (estimated from a fixed-seed Monte Carlo pass, ties broken
/// lexicographically). Parameter spaces use one-hot categoricals and
/// min-max-normalized numeric coordinates.
class Encoder {
 public:
  explicit Encoder(const SearchSpace& space);

  std::size_t length() const { return length_; }
  std::vector<double> encode(const Configuration& config) const;

  /// Cells only: the ranked, truncated path-template universe.
  const std::vector<std::vector<int>>& path_universe() const {
    return universe_;
  }

 private:
  friend std::shared_ptr<const Encoder> shared_encoder(const SearchSpace&);

  SearchSpace space_;
  std::size_t length_ = 0;
  std::vector<std::vector<int>> universe_;  // cells
  std::vector<std::size_t> dim_offsets_;    // params
};

/// Process-wide encoder cache keyed by the space definition. Cell encoders
/// run a Monte-Carlo ranking pass on construction, so runs share them.
std::shared_ptr<const Encoder> shared_encoder(const SearchSpace& space);

}  // namespace qdopt

#endif  // QDOPT_SPACE_HPP_
