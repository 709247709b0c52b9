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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "qdopt/metrics.hpp"
#include "qdopt/rng.hpp"

using namespace qdopt;

namespace {

// Definition-based dominance filter used as the oracle.
std::vector<std::size_t> brute_force_front(
    const std::vector<std::vector<double>>& points) {
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < points.size() && keep; ++j) {
      if (i == j) continue;
      bool all_le = true, any_lt = false;
      for (std::size_t d = 0; d < points[i].size(); ++d) {
        if (points[j][d] > points[i][d]) all_le = false;
        if (points[j][d] < points[i][d]) any_lt = true;
      }
      if (all_le && any_lt) keep = false;
    }
    if (keep) front.push_back(i);
  }
  return front;
}

std::vector<std::vector<double>> random_front(Rng& rng, int n, int dim) {
  std::vector<std::vector<double>> points;
  for (int i = 0; i < n; ++i) {
    std::vector<double> p(dim);
    for (int d = 0; d < dim; ++d) p[d] = rng.uniform(0.0, 10.0);
    points.push_back(std::move(p));
  }
  return points;
}

}  // namespace

TEST_CASE("summed niche error") {
  using Opt = std::optional<double>;
  CHECK(summed_niche_error(std::vector<Opt>{6.2, 5.0}, 100.0) ==
        doctest::Approx(11.2));
  CHECK(summed_niche_error(std::vector<Opt>{std::nullopt, 6.2}, 100.0) ==
        doctest::Approx(106.2));
  CHECK(summed_niche_error(std::vector<Opt>{std::nullopt, std::nullopt,
                                            std::nullopt},
                           100.0) == 300.0);
}

TEST_CASE("dominance") {
  CHECK(dominates(std::vector<double>{1, 2}, std::vector<double>{2, 2}));
  CHECK(!dominates(std::vector<double>{1, 2}, std::vector<double>{2, 1}));
  CHECK(!dominates(std::vector<double>{1, 2}, std::vector<double>{1, 2}));
  CHECK_THROWS_AS(dominates(std::vector<double>{1}, std::vector<double>{1, 2}),
                  std::invalid_argument);
}

TEST_CASE("pareto front") {
  SUBCASE("a dominated chain leaves a single survivor") {
    const std::vector<std::vector<double>> chain = {
        {4, 4}, {3, 3}, {2, 2}, {1, 1}};
    CHECK(pareto_front(chain) == std::vector<std::size_t>{3});
  }
  SUBCASE("an anti-chain survives whole, in input order") {
    const std::vector<std::vector<double>> anti = {{1, 4}, {2, 3}, {3, 2}};
    CHECK(pareto_front(anti) == std::vector<std::size_t>{0, 1, 2});
  }
  SUBCASE("random instances match the brute-force filter") {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      const auto points = random_front(rng, 100, trial % 2 == 0 ? 2 : 3);
      CHECK(pareto_front(points) == brute_force_front(points));
    }
  }
}

TEST_CASE("hypervolume in two dimensions") {
  SUBCASE("staircase worked example") {
    const std::vector<std::vector<double>> front = {{1, 3}, {2, 2}, {3, 1}};
    CHECK(hypervolume(front, {4, 4}) == doctest::Approx(6.0).epsilon(1e-12));
  }
  SUBCASE("a single point spans its box") {
    CHECK(hypervolume({{1.0, 2.0}}, {4.0, 7.0}) ==
          doctest::Approx(15.0).epsilon(1e-12));
  }
  SUBCASE("points on the nadir contribute nothing") {
    CHECK(hypervolume({{4.0, 4.0}}, {4.0, 4.0}) == 0.0);
    CHECK(hypervolume({{5.0, 1.0}}, {4.0, 4.0}) == 0.0);  // clipped out
  }
  SUBCASE("monotone under added points") {
    Rng rng(4);
    const std::vector<double> nadir = {10.0, 10.0};
    for (int trial = 0; trial < 100; ++trial) {
      auto points = random_front(rng, 20, 2);
      const double base = hypervolume(points, nadir);
      points.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)});
      CHECK(hypervolume(points, nadir) >= base - 1e-12);

      // A dominated point changes nothing.
      auto with_dominated = points;
      const auto front = pareto_front(points);
      const auto& anchor = points[front.front()];
      with_dominated.push_back({anchor[0] + 0.5, anchor[1] + 0.5});
      CHECK(hypervolume(with_dominated, nadir) ==
            doctest::Approx(hypervolume(points, nadir)).epsilon(1e-12));
    }
  }
  SUBCASE("sweep agrees with a Monte-Carlo estimate") {
    Rng rng(5);
    const std::vector<double> nadir = {10.0, 10.0};
    for (int trial = 0; trial < 5; ++trial) {
      const auto points = random_front(rng, 12, 2);
      const double hv = hypervolume(points, nadir);
      const int n = 200000;
      int inside = 0;
      for (int i = 0; i < n; ++i) {
        const double x = rng.uniform(0.0, 10.0);
        const double y = rng.uniform(0.0, 10.0);
        for (const auto& p : points) {
          if (p[0] <= x && p[1] <= y) {
            ++inside;
            break;
          }
        }
      }
      const double estimate = 100.0 * inside / n;
      const double p_hat = static_cast<double>(inside) / n;
      const double se = 100.0 * std::sqrt(p_hat * (1.0 - p_hat) / n);
      CHECK(std::abs(hv - estimate) <= 3.0 * se + 1e-6);
    }
  }
}

TEST_CASE("hypervolume in three dimensions") {
  CHECK(hypervolume({{1, 1, 1}}, {2, 2, 2}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Two overlapping boxes: 2 + 2 - 1.
  CHECK(hypervolume({{0, 1, 1}, {1, 0, 1}}, {2, 2, 2}) ==
        doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(hypervolume({{1, 1, 1, 1}}, {2, 2, 2, 2}),
                  std::invalid_argument);
}

TEST_CASE("exclusive hypervolume contributions") {
  const std::vector<std::vector<double>> front = {{1, 3}, {2, 2}, {3, 1}};
  const auto contributions = exclusive_hypervolume(front, {4, 4});
  REQUIRE(contributions.size() == 3);
  for (const double c : contributions) {
    CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("hypervolume indicator") {
  const std::vector<std::vector<double>> reference = {{1, 3}, {2, 2}, {3, 1}};
  SUBCASE("zero against itself") {
    CHECK(hypervolume_indicator(reference, reference, {4, 4}) == 0.0);
  }
  SUBCASE("positive for strictly dominated fronts") {
    const std::vector<std::vector<double>> worse = {{2, 3.5}, {3.5, 2}};
    CHECK(hypervolume_indicator(worse, reference, {4, 4}) > 0.0);
  }
  SUBCASE("benchmark-style nadir values are accepted") {
    const std::vector<double> nadir = {100.0, std::log(49979275.0)};
    const std::vector<std::vector<double>> run = {{6.2, std::log(1.0e6)},
                                                  {5.9, std::log(3.0e6)}};
    const double value = hypervolume_indicator(run, run, nadir);
    CHECK(value == 0.0);
    CHECK(hypervolume(run, nadir) > 0.0);
  }
}

TEST_CASE("expected running time") {
  AnytimeCurve fast;
  fast.points = {{0.0, 10.0}, {5.0, 2.0}};
  AnytimeCurve slow;
  slow.points = {{0.0, 10.0}, {5.0, 9.0}, {20.0, 8.0}};

  SUBCASE("all runs succeed at the same budget") {
    const auto ert = expected_running_time({fast, fast}, {30.0, 30.0}, 2.5);
    REQUIRE(ert.has_value());
    CHECK(*ert == 5.0);
  }
  SUBCASE("failed runs contribute their budget to the numerator only") {
    const auto ert = expected_running_time({fast, slow}, {30.0, 30.0}, 2.5);
    REQUIRE(ert.has_value());
    CHECK(*ert == 35.0);  // (5 + 30) / 1
  }
  SUBCASE("no successes reports unreached") {
    CHECK(!expected_running_time({slow}, {30.0}, 2.5).has_value());
  }
  SUBCASE("replication order does not matter") {
    const auto a = expected_running_time({fast, slow}, {30.0, 30.0}, 2.5);
    const auto b = expected_running_time({slow, fast}, {30.0, 30.0}, 2.5);
    CHECK(a == b);
  }
}

TEST_CASE("niche miss frequency") {
  CHECK(niche_miss_frequency({{true, true}, {true, true}}) ==
        std::vector<double>{0.0, 0.0});
  CHECK(niche_miss_frequency({{false}, {false}}) == std::vector<double>{1.0});
  std::vector<std::vector<bool>> runs(10, std::vector<bool>{true, true});
  for (int i = 0; i < 3; ++i) runs[i][0] = false;
  CHECK(niche_miss_frequency(runs) == std::vector<double>{0.3, 0.0});
}

TEST_CASE("anytime curve reads carry the last value forward") {
  AnytimeCurve curve;
  curve.points = {{0.0, 200.0}, {27.0, 150.0}, {54.0, 110.0}};
  CHECK(curve.value_at(0.0) == 200.0);
  CHECK(curve.value_at(26.9) == 200.0);
  CHECK(curve.value_at(27.0) == 150.0);
  CHECK(curve.value_at(1000.0) == 110.0);
  CHECK(curve.value_at(-5.0) == 200.0);
}

TEST_CASE("mean and standard error") {
  const std::vector<double> values = {1.0, 2.0, 3.0, 4.0};
  const MeanSe ms = mean_se(values);
  CHECK(ms.mean == doctest::Approx(2.5));
  // sd = sqrt(5/3), se = sd / 2
  CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-12));
  CHECK(mean_se(std::vector<double>{7.0}).se == 0.0);
}
