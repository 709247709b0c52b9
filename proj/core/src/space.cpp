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

#include "qdopt/space.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "json_detail.hpp"

namespace qdopt {

namespace {

constexpr int kRejectionCap = 1000;
constexpr std::uint64_t kPathRankSeed = 0x51AF3D0ull;
constexpr int kPathRankDraws = 100000;

int upper_tri_count(int n) { return n * (n - 1) / 2; }

std::pair<int, int> upper_tri_entry(int n, int t) {
  for (int i = 0; i < n - 1; ++i) {
    const int row = n - 1 - i;
    if (t < row) return {i, i + 1 + t};
    t -= row;
  }
  throw std::logic_error("upper_tri_entry: index out of range");
}

std::vector<bool> forward_reachable(const CellConfig& c) {
  std::vector<bool> seen(c.num_vertices, false);
  seen[0] = true;
  for (int i = 0; i < c.num_vertices; ++i) {
    if (!seen[i]) continue;
    for (int j = i + 1; j < c.num_vertices; ++j) {
      if (c.edge(i, j)) seen[j] = true;
    }
  }
  return seen;
}

std::vector<bool> backward_reachable(const CellConfig& c) {
  std::vector<bool> seen(c.num_vertices, false);
  seen[c.num_vertices - 1] = true;
  for (int j = c.num_vertices - 1; j >= 0; --j) {
    if (!seen[j]) continue;
    for (int i = 0; i < j; ++i) {
      if (c.edge(i, j)) seen[i] = true;
    }
  }
  return seen;
}

int categorical_skip_sample(int current, int n_labels, Rng& rng) {
  // uniform over the other labels
  int v = static_cast<int>(rng.index(static_cast<std::size_t>(n_labels - 1)));
  if (v >= current) ++v;
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Cells
// ---------------------------------------------------------------------------

void CellSpace::validate() const {
  if (max_vertices < 3) {
    throw std::invalid_argument("CellSpace: max_vertices must be >= 3");
  }
  if (max_edges < 1) {
    throw std::invalid_argument("CellSpace: max_edges must be positive");
  }
  if (op_vocabulary.empty()) {
    throw std::invalid_argument("CellSpace: op_vocabulary must be non-empty");
  }
  if (path_truncation_length < 1) {
    throw std::invalid_argument(
        "CellSpace: path_truncation_length must be >= 1");
  }
}

int CellConfig::edge_count() const {
  int count = 0;
  for (int i = 0; i < num_vertices; ++i) {
    for (int j = i + 1; j < num_vertices; ++j) {
      if (edge(i, j)) ++count;
    }
  }
  return count;
}

bool has_input_output_path(const CellConfig& config) {
  if (config.num_vertices < 2) return false;
  return forward_reachable(config)[config.num_vertices - 1];
}

bool cell_is_valid(const CellConfig& config, const CellSpace& space) {
  if (config.num_vertices < 2 || config.num_vertices > space.max_vertices) {
    return false;
  }
  if (config.adjacency.size() !=
      static_cast<std::size_t>(config.num_vertices) * config.num_vertices) {
    return false;
  }
  if (config.ops.size() !=
      static_cast<std::size_t>(std::max(0, config.num_vertices - 2))) {
    return false;
  }
  for (const int op : config.ops) {
    if (op < 0 || op >= static_cast<int>(space.op_vocabulary.size())) {
      return false;
    }
  }
  if (config.edge_count() > space.max_edges) return false;
  return has_input_output_path(config);
}

CellConfig prune(const CellConfig& config) {
  assert(has_input_output_path(config));
  const std::vector<bool> fwd = forward_reachable(config);
  const std::vector<bool> bwd = backward_reachable(config);
  std::vector<int> keep;
  for (int v = 0; v < config.num_vertices; ++v) {
    if (fwd[v] && bwd[v]) keep.push_back(v);
  }
  std::vector<int> remap(config.num_vertices, -1);
  for (std::size_t k = 0; k < keep.size(); ++k) remap[keep[k]] = static_cast<int>(k);

  CellConfig out;
  out.num_vertices = static_cast<int>(keep.size());
  out.adjacency.assign(
      static_cast<std::size_t>(out.num_vertices) * out.num_vertices, 0);
  for (const int i : keep) {
    for (const int j : keep) {
      if (i < j && config.edge(i, j)) out.set_edge(remap[i], remap[j], true);
    }
  }
  for (std::size_t k = 1; k + 1 < keep.size(); ++k) {
    out.ops.push_back(config.ops[keep[k] - 1]);
  }
  return out;
}

std::vector<std::vector<int>> enumerate_paths(const CellConfig& config) {
  std::vector<std::vector<int>> paths;
  std::vector<int> ops_on_path;
  const int sink = config.num_vertices - 1;

  // Depth-first with ascending successors gives a deterministic order.
  auto dfs = [&](auto&& self, int v) -> void {
    if (v == sink) {
      paths.push_back(ops_on_path);
      return;
    }
    if (v != 0) ops_on_path.push_back(config.ops[v - 1]);
    for (int j = v + 1; j <= sink; ++j) {
      if (config.edge(v, j)) self(self, j);
    }
    if (v != 0) ops_on_path.pop_back();
  };
  dfs(dfs, 0);

  // The same op sequence can arise from distinct vertex routes; the path set
  // is over sequences.
  std::vector<std::vector<int>> unique;
  std::set<std::vector<int>> seen;
  for (auto& p : paths) {
    if (seen.insert(p).second) unique.push_back(std::move(p));
  }
  return unique;
}

// ---------------------------------------------------------------------------
// Parameter spaces
// ---------------------------------------------------------------------------

void ParamSpace::validate() const {
  if (dims.empty()) {
    throw std::invalid_argument("ParamSpace: needs at least one dimension");
  }
  std::unordered_set<std::string> names;
  for (const auto& dim : dims) {
    const std::string& name = std::visit([](const auto& d) -> const std::string& { return d.name; }, dim);
    if (name.empty()) {
      throw std::invalid_argument("ParamSpace: dimension names must be non-empty");
    }
    if (!names.insert(name).second) {
      throw std::invalid_argument("ParamSpace: duplicate dimension name '" + name + "'");
    }
    if (const auto* cat = std::get_if<CategoricalDim>(&dim)) {
      if (cat->labels.empty()) {
        throw std::invalid_argument("ParamSpace: categorical '" + name + "' has no labels");
      }
    } else if (const auto* in = std::get_if<IntDim>(&dim)) {
      if (in->lo > in->hi) {
        throw std::invalid_argument("ParamSpace: integer '" + name + "' has lo > hi");
      }
    } else if (const auto* re = std::get_if<RealDim>(&dim)) {
      if (!(re->lo <= re->hi) || !std::isfinite(re->lo) || !std::isfinite(re->hi)) {
        throw std::invalid_argument("ParamSpace: real '" + name + "' has a bad range");
      }
    }
  }
}

bool param_is_valid(const ParamConfig& config, const ParamSpace& space) {
  if (config.values.size() != space.dims.size()) return false;
  for (std::size_t d = 0; d < space.dims.size(); ++d) {
    const ParamValue& v = config.values[d];
    if (const auto* cat = std::get_if<CategoricalDim>(&space.dims[d])) {
      const int* idx = std::get_if<int>(&v);
      if (!idx || *idx < 0 || *idx >= static_cast<int>(cat->labels.size())) return false;
    } else if (const auto* in = std::get_if<IntDim>(&space.dims[d])) {
      const std::int64_t* val = std::get_if<std::int64_t>(&v);
      if (!val || *val < in->lo || *val > in->hi) return false;
    } else {
      const auto* re = std::get_if<RealDim>(&space.dims[d]);
      const double* val = std::get_if<double>(&v);
      if (!val || !(*val >= re->lo) || !(*val <= re->hi)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Generic operations
// ---------------------------------------------------------------------------

void validate(const SearchSpace& space) {
  std::visit([](const auto& s) { s.validate(); }, space);
}

bool is_valid(const Configuration& config, const SearchSpace& space) {
  if (const auto* cell = std::get_if<CellConfig>(&config)) {
    const auto* cs = std::get_if<CellSpace>(&space);
    return cs != nullptr && cell_is_valid(*cell, *cs);
  }
  const auto* pc = std::get_if<ParamConfig>(&config);
  const auto* ps = std::get_if<ParamSpace>(&space);
  return pc != nullptr && ps != nullptr && param_is_valid(*pc, *ps);
}

namespace {

CellConfig sample_cell(const CellSpace& space, Rng& rng) {
  const int n = space.max_vertices;
  for (int attempt = 0; attempt < kRejectionCap; ++attempt) {
    CellConfig c;
    c.num_vertices = n;
    c.adjacency.assign(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        c.set_edge(i, j, rng.bernoulli(0.5));
      }
    }
    c.ops.resize(n - 2);
    for (int v = 0; v < n - 2; ++v) {
      c.ops[v] = static_cast<int>(rng.index(space.op_vocabulary.size()));
    }
    if (cell_is_valid(c, space)) return c;
  }
  throw std::runtime_error(
      "sample_random: no valid cell within the rejection cap "
      "(over-constrained space)");
}

ParamConfig sample_param(const ParamSpace& space, Rng& rng) {
  ParamConfig c;
  c.values.reserve(space.dims.size());
  for (const auto& dim : space.dims) {
    if (const auto* cat = std::get_if<CategoricalDim>(&dim)) {
      c.values.emplace_back(static_cast<int>(rng.index(cat->labels.size())));
    } else if (const auto* in = std::get_if<IntDim>(&dim)) {
      c.values.emplace_back(rng.range(in->lo, in->hi));
    } else {
      const auto* re = std::get_if<RealDim>(&dim);
      c.values.emplace_back(rng.uniform(re->lo, re->hi));
    }
  }
  return c;
}

// Resamples dimension d to a different value; false when the dimension has a
// single admissible value.
bool resample_dim_different(ParamConfig& config, const ParamSpace& space,
                            std::size_t d, Rng& rng) {
  if (const auto* cat = std::get_if<CategoricalDim>(&space.dims[d])) {
    const int n = static_cast<int>(cat->labels.size());
    if (n < 2) return false;
    config.values[d] = categorical_skip_sample(std::get<int>(config.values[d]), n, rng);
    return true;
  }
  if (const auto* in = std::get_if<IntDim>(&space.dims[d])) {
    if (in->lo == in->hi) return false;
    const std::int64_t old = std::get<std::int64_t>(config.values[d]);
    std::int64_t v = in->lo + static_cast<std::int64_t>(rng.index(
                                  static_cast<std::size_t>(in->hi - in->lo)));
    if (v >= old) ++v;
    config.values[d] = v;
    return true;
  }
  const auto* re = std::get_if<RealDim>(&space.dims[d]);
  if (!(re->lo < re->hi)) return false;
  const double old = std::get<double>(config.values[d]);
  for (int attempt = 0; attempt < kRejectionCap; ++attempt) {
    const double v = rng.uniform(re->lo, re->hi);
    if (v != old) {
      config.values[d] = v;
      return true;
    }
  }
  return false;
}

CellConfig mutate_cell_local(const CellConfig& config, const CellSpace& space,
                             Rng& rng) {
  const int n = config.num_vertices;
  const int toggles = upper_tri_count(n);
  const int n_ops = static_cast<int>(config.ops.size());
  const bool can_relabel = space.op_vocabulary.size() >= 2 && n_ops > 0;
  const int n_moves = toggles + (can_relabel ? n_ops : 0);

  for (int attempt = 0; attempt < kRejectionCap; ++attempt) {
    CellConfig c = config;
    const int move = static_cast<int>(rng.index(static_cast<std::size_t>(n_moves)));
    if (move < toggles) {
      const auto [i, j] = upper_tri_entry(n, move);
      c.set_edge(i, j, !c.edge(i, j));
    } else {
      const int v = move - toggles;
      c.ops[v] = categorical_skip_sample(
          c.ops[v], static_cast<int>(space.op_vocabulary.size()), rng);
    }
    if (cell_is_valid(c, space)) return c;
  }
  throw std::runtime_error(
      "mutate_local: no valid neighbour within the rejection cap");
}

ParamConfig mutate_param_local(const ParamConfig& config,
                               const ParamSpace& space, Rng& rng) {
  for (int attempt = 0; attempt < kRejectionCap; ++attempt) {
    ParamConfig c = config;
    const std::size_t d = rng.index(space.dims.size());
    if (resample_dim_different(c, space, d, rng)) return c;
  }
  throw std::runtime_error(
      "mutate_local: no mutable dimension within the rejection cap");
}

CellConfig mutate_cell_genewise(const CellConfig& config,
                                const CellSpace& space, double p, Rng& rng) {
  const int n = config.num_vertices;
  for (int attempt = 0; attempt < kRejectionCap; ++attempt) {
    CellConfig c = config;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.bernoulli(p)) c.set_edge(i, j, !c.edge(i, j));
      }
    }
    if (space.op_vocabulary.size() >= 2) {
      for (auto& op : c.ops) {
        if (rng.bernoulli(p)) {
          op = categorical_skip_sample(
              op, static_cast<int>(space.op_vocabulary.size()), rng);
        }
      }
    }
    if (cell_is_valid(c, space)) return c;
  }
  throw std::runtime_error(
      "mutate_genewise: no valid offspring within the rejection cap");
}

ParamConfig mutate_param_genewise(const ParamConfig& config,
                                  const ParamSpace& space, double p,
                                  Rng& rng) {
  ParamConfig c = config;
  for (std::size_t d = 0; d < space.dims.size(); ++d) {
    if (rng.bernoulli(p)) {
      resample_dim_different(c, space, d, rng);
    }
  }
  return c;
}

}  // namespace

Configuration sample_random(const SearchSpace& space, Rng& rng) {
  if (const auto* cs = std::get_if<CellSpace>(&space)) {
    return sample_cell(*cs, rng);
  }
  return sample_param(std::get<ParamSpace>(space), rng);
}

Configuration mutate_local(const Configuration& config,
                           const SearchSpace& space, Rng& rng) {
  if (const auto* cell = std::get_if<CellConfig>(&config)) {
    return mutate_cell_local(*cell, std::get<CellSpace>(space), rng);
  }
  return mutate_param_local(std::get<ParamConfig>(config),
                            std::get<ParamSpace>(space), rng);
}

Configuration mutate_genewise(const Configuration& config,
                              const SearchSpace& space, double p, Rng& rng) {
  if (const auto* cell = std::get_if<CellConfig>(&config)) {
    return mutate_cell_genewise(*cell, std::get<CellSpace>(space), p, rng);
  }
  return mutate_param_genewise(std::get<ParamConfig>(config),
                               std::get<ParamSpace>(space), p, rng);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

nlohmann::json config_to_json(const Configuration& config,
                              const SearchSpace& space) {
  nlohmann::json j;
  if (const auto* cell = std::get_if<CellConfig>(&config)) {
    const auto& vocab = std::get<CellSpace>(space).op_vocabulary;
    const CellConfig pruned = prune(*cell);
    j["v"] = pruned.num_vertices;
    auto edges = nlohmann::json::array();
    for (int i = 0; i < pruned.num_vertices; ++i) {
      for (int k = i + 1; k < pruned.num_vertices; ++k) {
        if (pruned.edge(i, k)) edges.push_back({i, k});
      }
    }
    j["edges"] = std::move(edges);
    auto ops = nlohmann::json::array();
    for (const int op : pruned.ops) ops.push_back(vocab.at(op));
    j["ops"] = std::move(ops);
    return j;
  }

  const auto& pc = std::get<ParamConfig>(config);
  const auto& ps = std::get<ParamSpace>(space);
  nlohmann::json values = nlohmann::json::object();
  for (std::size_t d = 0; d < ps.dims.size(); ++d) {
    const ParamValue& v = pc.values.at(d);
    if (const auto* cat = std::get_if<CategoricalDim>(&ps.dims[d])) {
      values[cat->name] = cat->labels.at(std::get<int>(v));
    } else if (const auto* in = std::get_if<IntDim>(&ps.dims[d])) {
      values[in->name] = std::get<std::int64_t>(v);
    } else {
      values[std::get_if<RealDim>(&ps.dims[d])->name] = std::get<double>(v);
    }
  }
  j["params"] = std::move(values);
  return j;
}

Configuration config_from_json(const nlohmann::json& j,
                               const SearchSpace& space) {
  if (j.contains("params")) {
    const auto& ps = std::get<ParamSpace>(space);
    const auto& values = j.at("params");
    ParamConfig c;
    c.values.reserve(ps.dims.size());
    for (const auto& dim : ps.dims) {
      if (const auto* cat = std::get_if<CategoricalDim>(&dim)) {
        const std::string label = values.at(cat->name).get<std::string>();
        const auto it = std::find(cat->labels.begin(), cat->labels.end(), label);
        if (it == cat->labels.end()) {
          throw std::invalid_argument("unknown label '" + label + "' for '" + cat->name + "'");
        }
        c.values.emplace_back(static_cast<int>(it - cat->labels.begin()));
      } else if (const auto* in = std::get_if<IntDim>(&dim)) {
        c.values.emplace_back(values.at(in->name).get<std::int64_t>());
      } else {
        c.values.emplace_back(values.at(std::get_if<RealDim>(&dim)->name).get<double>());
      }
    }
    return c;
  }

  const auto& vocab = std::get<CellSpace>(space).op_vocabulary;
  CellConfig c;
  c.num_vertices = j.at("v").get<int>();
  c.adjacency.assign(
      static_cast<std::size_t>(c.num_vertices) * c.num_vertices, 0);
  for (const auto& e : j.at("edges")) {
    c.set_edge(e.at(0).get<int>(), e.at(1).get<int>(), true);
  }
  for (const auto& op : j.at("ops")) {
    const std::string label = op.get<std::string>();
    const auto it = std::find(vocab.begin(), vocab.end(), label);
    if (it == vocab.end()) {
      throw std::invalid_argument("unknown op label '" + label + "'");
    }
    c.ops.push_back(static_cast<int>(it - vocab.begin()));
  }
  return c;
}

nlohmann::json space_to_json_obj(const SearchSpace& space) {
  nlohmann::json j;
  if (const auto* cs = std::get_if<CellSpace>(&space)) {
    j["type"] = "cell";
    j["max_vertices"] = cs->max_vertices;
    j["max_edges"] = cs->max_edges;
    j["ops"] = cs->op_vocabulary;
    j["path_truncation_length"] = cs->path_truncation_length;
    return j;
  }
  const auto& ps = std::get<ParamSpace>(space);
  j["type"] = "param";
  auto dims = nlohmann::json::array();
  for (const auto& dim : ps.dims) {
    nlohmann::json d;
    if (const auto* cat = std::get_if<CategoricalDim>(&dim)) {
      d["name"] = cat->name;
      d["kind"] = "categorical";
      d["labels"] = cat->labels;
    } else if (const auto* in = std::get_if<IntDim>(&dim)) {
      d["name"] = in->name;
      d["kind"] = "int";
      d["lo"] = in->lo;
      d["hi"] = in->hi;
    } else {
      const auto* re = std::get_if<RealDim>(&dim);
      d["name"] = re->name;
      d["kind"] = "real";
      d["lo"] = re->lo;
      d["hi"] = re->hi;
    }
    dims.push_back(std::move(d));
  }
  j["dims"] = std::move(dims);
  return j;
}

SearchSpace space_from_json_obj(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "cell") {
    CellSpace cs;
    cs.max_vertices = j.at("max_vertices").get<int>();
    cs.max_edges = j.at("max_edges").get<int>();
    cs.op_vocabulary = j.at("ops").get<std::vector<std::string>>();
    if (j.contains("path_truncation_length")) {
      cs.path_truncation_length = j.at("path_truncation_length").get<int>();
    }
    cs.validate();
    return cs;
  }
  if (type != "param") {
    throw std::invalid_argument("unknown space type '" + type + "'");
  }
  ParamSpace ps;
  for (const auto& d : j.at("dims")) {
    const std::string kind = d.at("kind").get<std::string>();
    if (kind == "categorical") {
      ps.dims.push_back(CategoricalDim{d.at("name").get<std::string>(),
                                       d.at("labels").get<std::vector<std::string>>()});
    } else if (kind == "int") {
      ps.dims.push_back(IntDim{d.at("name").get<std::string>(),
                               d.at("lo").get<std::int64_t>(),
                               d.at("hi").get<std::int64_t>()});
    } else if (kind == "real") {
      ps.dims.push_back(RealDim{d.at("name").get<std::string>(),
                                d.at("lo").get<double>(),
                                d.at("hi").get<double>()});
    } else {
      throw std::invalid_argument("unknown dimension kind '" + kind + "'");
    }
  }
  ps.validate();
  return ps;
}

}  // namespace detail

std::string canonical_key(const Configuration& config,
                          const SearchSpace& space) {
  return detail::config_to_json(config, space).dump();
}

Configuration configuration_from_json(const std::string& json_text,
                                      const SearchSpace& space) {
  return detail::config_from_json(nlohmann::json::parse(json_text), space);
}

std::string space_to_json(const SearchSpace& space) {
  return detail::space_to_json_obj(space).dump();
}

SearchSpace space_from_json(const std::string& json_text) {
  return detail::space_from_json_obj(nlohmann::json::parse(json_text));
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

std::optional<std::vector<Configuration>> enumerate_space(
    const SearchSpace& space, std::size_t cap) {
  if (const auto* cs = std::get_if<CellSpace>(&space)) {
    const int n = cs->max_vertices;
    const int entries = upper_tri_count(n);
    const std::size_t vocab = cs->op_vocabulary.size();
    if (entries >= 63) return std::nullopt;
    double total = std::pow(2.0, entries);
    for (int v = 0; v < n - 2; ++v) total *= static_cast<double>(vocab);
    if (total > static_cast<double>(cap)) return std::nullopt;

    std::vector<Configuration> out;
    const std::uint64_t masks = 1ull << entries;
    std::vector<int> ops(n - 2, 0);
    for (std::uint64_t mask = 0; mask < masks; ++mask) {
      CellConfig base;
      base.num_vertices = n;
      base.adjacency.assign(static_cast<std::size_t>(n) * n, 0);
      for (int t = 0; t < entries; ++t) {
        if (mask & (1ull << t)) {
          const auto [i, j] = upper_tri_entry(n, t);
          base.set_edge(i, j, true);
        }
      }
      std::fill(ops.begin(), ops.end(), 0);
      while (true) {
        base.ops = ops;
        if (cell_is_valid(base, *cs)) out.push_back(base);
        int d = n - 3;
        for (; d >= 0; --d) {
          if (++ops[d] < static_cast<int>(vocab)) break;
          ops[d] = 0;
        }
        if (d < 0) break;
      }
    }
    return out;
  }

  const auto& ps = std::get<ParamSpace>(space);
  double total = 1.0;
  for (const auto& dim : ps.dims) {
    if (const auto* cat = std::get_if<CategoricalDim>(&dim)) {
      total *= static_cast<double>(cat->labels.size());
    } else if (const auto* in = std::get_if<IntDim>(&dim)) {
      total *= static_cast<double>(in->hi - in->lo + 1);
    } else {
      return std::nullopt;  // real dimensions are not enumerable
    }
    if (total > static_cast<double>(cap)) return std::nullopt;
  }

  std::vector<Configuration> out;
  ParamConfig current;
  auto expand = [&](auto&& self, std::size_t d) -> void {
    if (d == ps.dims.size()) {
      out.push_back(current);
      return;
    }
    if (const auto* cat = std::get_if<CategoricalDim>(&ps.dims[d])) {
      for (int i = 0; i < static_cast<int>(cat->labels.size()); ++i) {
        current.values.push_back(i);
        self(self, d + 1);
        current.values.pop_back();
      }
    } else {
      const auto* in = std::get_if<IntDim>(&ps.dims[d]);
      for (std::int64_t v = in->lo; v <= in->hi; ++v) {
        current.values.push_back(v);
        self(self, d + 1);
        current.values.pop_back();
      }
    }
  };
  expand(expand, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Encoder
// ---------------------------------------------------------------------------

Encoder::Encoder(const SearchSpace& space) : space_(space) {
  validate(space_);
  if (const auto* cs = std::get_if<CellSpace>(&space_)) {
    // Rank path templates by presence probability under uniform sampling,
    // estimated once with a fixed internal seed; ties lexicographic.
    Rng rng(kPathRankSeed);
    std::map<std::vector<int>, std::uint64_t> counts;
    for (int draw = 0; draw < kPathRankDraws; ++draw) {
      const CellConfig cell = sample_cell(*cs, rng);
      for (const auto& path : enumerate_paths(cell)) {
        ++counts[path];
      }
    }
    std::vector<std::pair<std::vector<int>, std::uint64_t>> ranked(
        counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    const std::size_t keep = std::min<std::size_t>(
        ranked.size(), static_cast<std::size_t>(cs->path_truncation_length));
    universe_.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) universe_.push_back(ranked[i].first);
    length_ = universe_.size();
    return;
  }

  const auto& ps = std::get<ParamSpace>(space_);
  dim_offsets_.reserve(ps.dims.size());
  std::size_t offset = 0;
  for (const auto& dim : ps.dims) {
    dim_offsets_.push_back(offset);
    if (const auto* cat = std::get_if<CategoricalDim>(&dim)) {
      offset += cat->labels.size();
    } else {
      offset += 1;
    }
  }
  length_ = offset;
}

std::vector<double> Encoder::encode(const Configuration& config) const {
  std::vector<double> x(length_, 0.0);
  if (const auto* cell = std::get_if<CellConfig>(&config)) {
    for (const auto& path : enumerate_paths(*cell)) {
      const auto it = std::find(universe_.begin(), universe_.end(), path);
      if (it != universe_.end()) {
        x[static_cast<std::size_t>(it - universe_.begin())] = 1.0;
      }
    }
    return x;
  }

  const auto& pc = std::get<ParamConfig>(config);
  const auto& ps = std::get<ParamSpace>(space_);
  for (std::size_t d = 0; d < ps.dims.size(); ++d) {
    const std::size_t at = dim_offsets_[d];
    if (std::get_if<CategoricalDim>(&ps.dims[d]) != nullptr) {
      x[at + static_cast<std::size_t>(std::get<int>(pc.values[d]))] = 1.0;
    } else if (const auto* in = std::get_if<IntDim>(&ps.dims[d])) {
      const double span = static_cast<double>(in->hi - in->lo);
      x[at] = span > 0 ? static_cast<double>(std::get<std::int64_t>(pc.values[d]) - in->lo) / span
                       : 0.0;
    } else {
      const auto* re = std::get_if<RealDim>(&ps.dims[d]);
      const double span = re->hi - re->lo;
      x[at] = span > 0 ? (std::get<double>(pc.values[d]) - re->lo) / span : 0.0;
    }
  }
  return x;
}

std::shared_ptr<const Encoder> shared_encoder(const SearchSpace& space) {
  static std::mutex mutex;
  static std::unordered_map<std::string, std::shared_ptr<const Encoder>> cache;
  const std::string key = space_to_json(space);
  std::lock_guard<std::mutex> lock(mutex);
  const auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto encoder = std::make_shared<const Encoder>(space);
  cache.emplace(key, encoder);
  return encoder;
}

}  // namespace qdopt
