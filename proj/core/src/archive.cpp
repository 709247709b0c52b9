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

#include "qdopt/archive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "json_detail.hpp"

namespace qdopt {

bool Niche::contains(const std::vector<double>& features) const {
  if (features.size() != bounds.size()) {
    throw std::invalid_argument(
        "Niche::contains: feature vector length does not match bounds");
  }
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!bounds[i].contains(features[i])) return false;
  }
  return true;
}

namespace {

// a subseteq b interval-wise; strict tracks whether any inclusion is proper.
bool interval_subset(const Interval& a, const Interval& b, bool& strict) {
  if (!(a.lo >= b.lo && a.hi <= b.hi)) return false;
  if (a.lo > b.lo || a.hi < b.hi) strict = true;
  return true;
}

bool intervals_disjoint(const Interval& a, const Interval& b) {
  return a.hi <= b.lo || b.hi <= a.lo;
}

}  // namespace

void NicheSet::validate() const {
  if (niches.empty()) {
    throw std::invalid_argument("NicheSet: needs at least one niche");
  }
  const std::size_t k = niches.front().bounds.size();
  if (k == 0) {
    throw std::invalid_argument("NicheSet: niches need at least one feature bound");
  }
  for (const auto& niche : niches) {
    if (niche.bounds.size() != k) {
      throw std::invalid_argument("NicheSet: inconsistent feature counts");
    }
    for (const auto& b : niche.bounds) {
      if (!(b.lo < b.hi)) {
        throw std::invalid_argument("NicheSet: interval requires lo < hi");
      }
    }
  }
  if (layout == NicheLayout::nested) {
    for (std::size_t j = 0; j + 1 < niches.size(); ++j) {
      bool strict = false;
      for (std::size_t i = 0; i < k; ++i) {
        if (!interval_subset(niches[j].bounds[i], niches[j + 1].bounds[i],
                             strict)) {
          throw std::invalid_argument(
              "NicheSet: nested layout violated between niches " +
              std::to_string(j + 1) + " and " + std::to_string(j + 2));
        }
      }
      if (!strict) {
        throw std::invalid_argument(
            "NicheSet: nested layout requires proper inclusion");
      }
    }
  } else if (layout == NicheLayout::disjoint) {
    for (std::size_t a = 0; a < niches.size(); ++a) {
      for (std::size_t b = a + 1; b < niches.size(); ++b) {
        bool disjoint = false;
        for (std::size_t i = 0; i < k; ++i) {
          if (intervals_disjoint(niches[a].bounds[i], niches[b].bounds[i])) {
            disjoint = true;
            break;
          }
        }
        if (!disjoint) {
          throw std::invalid_argument(
              "NicheSet: disjoint layout violated between niches " +
              std::to_string(a + 1) + " and " + std::to_string(b + 1));
        }
      }
    }
  }
}

std::vector<bool> membership(const std::vector<double>& features,
                             const NicheSet& niches) {
  std::vector<bool> out(niches.size());
  for (std::size_t j = 0; j < niches.size(); ++j) {
    out[j] = niches.niches[j].contains(features);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Percentile niches
// ---------------------------------------------------------------------------

namespace {

// Type-7 quantile: linear interpolation between order statistics.
double quantile_type7(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = (static_cast<double>(n) - 1.0) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - std::floor(h);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

NicheSet niches_from_percentiles(std::vector<double> feature_samples,
                                 const std::vector<double>& percentiles) {
  if (feature_samples.empty()) {
    throw std::invalid_argument("niches_from_percentiles: empty samples");
  }
  for (std::size_t i = 0; i < percentiles.size(); ++i) {
    if (percentiles[i] <= 0.0 || percentiles[i] > 100.0 ||
        (i > 0 && percentiles[i] <= percentiles[i - 1])) {
      throw std::invalid_argument(
          "niches_from_percentiles: percentiles must be strictly increasing "
          "in (0, 100]");
    }
  }
  std::sort(feature_samples.begin(), feature_samples.end());

  NicheSet out;
  out.layout = NicheLayout::nested;
  int id = 1;
  for (const double p : percentiles) {
    double q = quantile_type7(feature_samples, p);
    // A bound that coincides with a sample would drop that sample from the
    // half-open interval; nudge it just above.
    if (std::binary_search(feature_samples.begin(), feature_samples.end(), q)) {
      q = std::nextafter(q, std::numeric_limits<double>::infinity());
    }
    out.niches.push_back(Niche{id++, {Interval{0.0, q}}});
  }
  out.niches.push_back(
      Niche{id, {Interval{0.0, std::numeric_limits<double>::infinity()}}});
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

nlohmann::json niche_set_to_json_obj(const NicheSet& niches) {
  nlohmann::json j;
  if (!niches.name.empty()) j["benchmark"] = niches.name;
  switch (niches.layout) {
    case NicheLayout::nested: j["layout"] = "nested"; break;
    case NicheLayout::disjoint: j["layout"] = "disjoint"; break;
    case NicheLayout::general: j["layout"] = "general"; break;
  }
  auto arr = nlohmann::json::array();
  for (const auto& niche : niches.niches) {
    nlohmann::json nj;
    nj["id"] = niche.id;
    auto bounds = nlohmann::json::array();
    for (const auto& b : niche.bounds) {
      nlohmann::json bj;
      bj["lower"] = std::isinf(b.lo) ? nlohmann::json(nullptr) : nlohmann::json(b.lo);
      bj["upper"] = std::isinf(b.hi) ? nlohmann::json(nullptr) : nlohmann::json(b.hi);
      bounds.push_back(std::move(bj));
    }
    nj["bounds"] = std::move(bounds);
    arr.push_back(std::move(nj));
  }
  j["niches"] = std::move(arr);
  return j;
}

NicheSet niche_set_from_json_obj(const nlohmann::json& j) {
  NicheSet out;
  if (j.contains("benchmark")) out.name = j.at("benchmark").get<std::string>();
  const std::string layout = j.value("layout", "general");
  if (layout == "nested") {
    out.layout = NicheLayout::nested;
  } else if (layout == "disjoint") {
    out.layout = NicheLayout::disjoint;
  } else if (layout == "general") {
    out.layout = NicheLayout::general;
  } else {
    throw std::invalid_argument("NicheSet: unknown layout '" + layout + "'");
  }
  for (const auto& nj : j.at("niches")) {
    Niche niche;
    niche.id = nj.at("id").get<int>();
    for (const auto& bj : nj.at("bounds")) {
      Interval b;
      if (!bj.at("lower").is_null()) b.lo = bj.at("lower").get<double>();
      if (!bj.at("upper").is_null()) b.hi = bj.at("upper").get<double>();
      niche.bounds.push_back(b);
    }
    out.niches.push_back(std::move(niche));
  }
  out.validate();
  return out;
}

}  // namespace detail

std::string niche_set_to_json(const NicheSet& niches) {
  return detail::niche_set_to_json_obj(niches).dump();
}

NicheSet niche_set_from_json(const std::string& json_text) {
  return detail::niche_set_from_json_obj(nlohmann::json::parse(json_text));
}

// ---------------------------------------------------------------------------
// Archive
// ---------------------------------------------------------------------------

Archive::Archive(NicheSet niches, double reference_fidelity)
    : niches_(std::move(niches)), reference_fidelity_(reference_fidelity) {
  niches_.validate();
  if (!(reference_fidelity_ > 0.0)) {
    throw std::invalid_argument("Archive: reference fidelity must be positive");
  }
  elites_.assign(niches_.size(), std::nullopt);
}

void Archive::record(Evaluation eval) {
  if (!log_.empty() && !(eval.budget > log_.back().budget)) {
    throw std::logic_error("Archive::record: budget must strictly increase");
  }
  eval.index = log_.size();
  const bool at_reference = eval.fidelity == reference_fidelity_;
  const std::vector<bool> member = membership(eval.features, niches_);
  log_.push_back(std::move(eval));
  if (!at_reference) return;
  const std::size_t idx = log_.size() - 1;
  for (std::size_t j = 0; j < niches_.size(); ++j) {
    if (!member[j]) continue;
    if (!elites_[j] || log_[idx].objective < log_[*elites_[j]].objective) {
      elites_[j] = idx;
    }
  }
}

std::optional<double> Archive::elite_objective(std::size_t niche) const {
  const auto idx = elites_.at(niche);
  if (!idx) return std::nullopt;
  return log_[*idx].objective;
}

std::size_t Archive::filled_niches() const {
  std::size_t n = 0;
  for (const auto& e : elites_) {
    if (e) ++n;
  }
  return n;
}

}  // namespace qdopt
