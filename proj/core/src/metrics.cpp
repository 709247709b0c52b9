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

#include "qdopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qdopt {

double AnytimeCurve::value_at(double budget) const {
  if (points.empty()) {
    throw std::logic_error("AnytimeCurve::value_at: empty curve");
  }
  double value = points.front().second;
  for (const auto& [b, v] : points) {
    if (b > budget) break;
    value = v;
  }
  return value;
}

MeanSe mean_se(std::span<const double> values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (const double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(values.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

double summed_niche_error(
    std::span<const std::optional<double>> elite_objectives, double penalty) {
  double total = 0.0;
  for (const auto& e : elite_objectives) {
    total += e.value_or(penalty);
  }
  return total;
}

double summed_niche_error(const Archive& archive, double penalty) {
  std::vector<std::optional<double>> elites;
  elites.reserve(archive.niches().size());
  for (std::size_t j = 0; j < archive.niches().size(); ++j) {
    elites.push_back(archive.elite_objective(j));
  }
  return summed_niche_error(elites, penalty);
}

AnytimeCurve anytime_summed_error(const Archive& archive, double penalty) {
  const std::size_t c = archive.niches().size();
  std::vector<std::optional<double>> best(c);
  AnytimeCurve curve;
  curve.points.emplace_back(0.0, penalty * static_cast<double>(c));
  for (const Evaluation& eval : archive.log()) {
    if (eval.fidelity == archive.reference_fidelity()) {
      const std::vector<bool> member = membership(eval.features, archive.niches());
      for (std::size_t j = 0; j < c; ++j) {
        if (member[j] && (!best[j] || eval.objective < *best[j])) {
          best[j] = eval.objective;
        }
      }
    }
    curve.points.emplace_back(eval.budget, summed_niche_error(best, penalty));
  }
  return curve;
}

std::vector<double> merge_budget_grid(const std::vector<AnytimeCurve>& curves) {
  std::vector<double> grid;
  for (const auto& curve : curves) {
    for (const auto& [b, v] : curve.points) grid.push_back(b);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<MeanSe> aggregate_curves(const std::vector<AnytimeCurve>& curves,
                                     const std::vector<double>& grid) {
  std::vector<MeanSe> out;
  out.reserve(grid.size());
  std::vector<double> values(curves.size());
  for (const double b : grid) {
    for (std::size_t i = 0; i < curves.size(); ++i) {
      values[i] = curves[i].value_at(b);
    }
    out.push_back(mean_se(values));
  }
  return out;
}

bool dominates(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("dominates: dimension mismatch");
  }
  bool strict = false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] > v[i]) return false;
    if (u[i] < v[i]) strict = true;
  }
  return strict;
}

std::vector<std::size_t> pareto_front(
    const std::vector<std::vector<double>>& points) {
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j != i && dominates(points[j], points[i])) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(i);
  }
  return front;
}

namespace {

// 2-D sweep over the x-sorted staircase.
double hypervolume_2d(std::vector<std::vector<double>> points,
                      const std::vector<double>& nadir) {
  std::sort(points.begin(), points.end(),
            [](const auto& a, const auto& b) {
              if (a[0] != b[0]) return a[0] < b[0];
              return a[1] < b[1];
            });
  double volume = 0.0;
  double best_y = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i][1] >= best_y) continue;  // dominated
    double next_x = nadir[0];
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[j][1] < points[i][1]) {
        next_x = points[j][0];
        break;
      }
    }
    volume += (next_x - points[i][0]) * (nadir[1] - points[i][1]);
    best_y = points[i][1];
  }
  return volume;
}

// 3-D by slicing along the first coordinate.
double hypervolume_3d(std::vector<std::vector<double>> points,
                      const std::vector<double>& nadir) {
  std::sort(points.begin(), points.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  std::vector<double> cuts;
  for (const auto& p : points) cuts.push_back(p[0]);
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const std::vector<double> nadir_yz{nadir[1], nadir[2]};
  double volume = 0.0;
  for (std::size_t t = 0; t < cuts.size(); ++t) {
    const double x_lo = cuts[t];
    const double x_hi = t + 1 < cuts.size() ? cuts[t + 1] : nadir[0];
    if (!(x_hi > x_lo)) continue;
    std::vector<std::vector<double>> slice;
    for (const auto& p : points) {
      if (p[0] <= x_lo) slice.push_back({p[1], p[2]});
    }
    volume += (x_hi - x_lo) * hypervolume_2d(std::move(slice), nadir_yz);
  }
  return volume;
}

}  // namespace

double hypervolume(const std::vector<std::vector<double>>& points,
                   const std::vector<double>& nadir) {
  if (nadir.size() != 2 && nadir.size() != 3) {
    throw std::invalid_argument("hypervolume: only 2-D and 3-D supported");
  }
  std::vector<std::vector<double>> clipped;
  for (const auto& p : points) {
    if (p.size() != nadir.size()) {
      throw std::invalid_argument("hypervolume: point/nadir dimension mismatch");
    }
    bool inside = true;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!(p[i] <= nadir[i])) {
        inside = false;
        break;
      }
    }
    if (inside) clipped.push_back(p);
  }
  if (clipped.empty()) return 0.0;
  return nadir.size() == 2 ? hypervolume_2d(std::move(clipped), nadir)
                           : hypervolume_3d(std::move(clipped), nadir);
}

std::vector<double> exclusive_hypervolume(
    const std::vector<std::vector<double>>& front,
    const std::vector<double>& nadir) {
  const double total = hypervolume(front, nadir);
  std::vector<double> out;
  out.reserve(front.size());
  for (std::size_t i = 0; i < front.size(); ++i) {
    std::vector<std::vector<double>> rest;
    rest.reserve(front.size() - 1);
    for (std::size_t j = 0; j < front.size(); ++j) {
      if (j != i) rest.push_back(front[j]);
    }
    out.push_back(std::max(0.0, total - hypervolume(rest, nadir)));
  }
  return out;
}

double hypervolume_indicator(
    const std::vector<std::vector<double>>& run_front,
    const std::vector<std::vector<double>>& reference_front,
    const std::vector<double>& nadir) {
  return std::max(0.0, hypervolume(reference_front, nadir) -
                           hypervolume(run_front, nadir));
}

std::optional<double> expected_running_time(
    const std::vector<AnytimeCurve>& curves,
    const std::vector<double>& total_budgets, double target) {
  if (curves.size() != total_budgets.size()) {
    throw std::invalid_argument(
        "expected_running_time: one total budget per curve required");
  }
  double numerator = 0.0;
  int successes = 0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    std::optional<double> hit;
    for (const auto& [b, v] : curves[i].points) {
      if (v <= target) {
        hit = b;
        break;
      }
    }
    if (hit) {
      numerator += *hit;
      ++successes;
    } else {
      numerator += total_budgets[i];
    }
  }
  if (successes == 0) return std::nullopt;
  return numerator / static_cast<double>(successes);
}

std::vector<double> niche_miss_frequency(
    const std::vector<std::vector<bool>>& filled_per_replication) {
  if (filled_per_replication.empty()) return {};
  const std::size_t c = filled_per_replication.front().size();
  std::vector<double> out(c, 0.0);
  for (const auto& filled : filled_per_replication) {
    if (filled.size() != c) {
      throw std::invalid_argument("niche_miss_frequency: ragged input");
    }
    for (std::size_t j = 0; j < c; ++j) {
      if (!filled[j]) out[j] += 1.0;
    }
  }
  for (double& rate : out) {
    rate /= static_cast<double>(filled_per_replication.size());
  }
  return out;
}

}  // namespace qdopt
