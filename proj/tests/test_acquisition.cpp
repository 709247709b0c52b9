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
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "qdopt/acquisition.hpp"
#include "qdopt/surrogate.hpp"
#include "qdopt/rng.hpp"

using namespace qdopt;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) {
    out *= static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return out;
}

NicheSet single_niche(Interval bounds) {
  NicheSet niches;
  niches.niches = {Niche{1, {bounds}}};
  return niches;
}

}  // namespace

TEST_CASE("expected improvement closed form") {
  SUBCASE("no improvement at the incumbent with vanishing noise") {
    CHECK(expected_improvement(Prediction{1.0, 0.0}, 1.0) == 0.0);
    CHECK(expected_improvement(Prediction{1.0, 1e-30}, 1.0) == 0.0);
  }
  SUBCASE("standard normal point value") {
    // E[max(1 - N(0,1), 0)] = Phi(1) + phi(1).
    const double ei = expected_improvement(Prediction{0.0, 1.0}, 1.0);
    CHECK(std::abs(ei - 1.0833) < 0.005);
  }
  SUBCASE("deterministic non-improver") {
    CHECK(expected_improvement(Prediction{5.0, 0.0}, 1.0) == 0.0);
  }
  SUBCASE("closed form tracks a Monte-Carlo estimate") {
    Rng rng(99);
    for (const double mu : {-1.0, 0.0, 2.0}) {
      for (const double sigma : {0.3, 1.0}) {
        for (const double f_min : {-0.5, 0.5, 3.0}) {
          const int n = 200000;
          double sum = 0.0, sq = 0.0;
          for (int i = 0; i < n; ++i) {
            const double y = rng.normal(mu, sigma);
            const double improvement = std::max(f_min - y, 0.0);
            sum += improvement;
            sq += improvement * improvement;
          }
          const double mc = sum / n;
          const double var = std::max(0.0, sq / n - mc * mc);
          const double se = std::sqrt(var / n);
          const double closed =
              expected_improvement(Prediction{mu, sigma * sigma}, f_min);
          CHECK(std::abs(closed - mc) <= 4.0 * se + 1e-6);
        }
      }
    }
  }
}

TEST_CASE("membership probability under normal feature beliefs") {
  SUBCASE("degenerate beliefs become indicators") {
    const Niche inside{1, {Interval{0.0, 2.0}}};
    CHECK(membership_probability(std::vector<Prediction>{{1.0, 0.0}}, inside) == 1.0);
    CHECK(membership_probability(std::vector<Prediction>{{2.0, 0.0}}, inside) == 0.0);
  }
  SUBCASE("one-sigma interval around the mean") {
    const Niche niche{1, {Interval{-1.0, 1.0}}};
    const double p =
        membership_probability(std::vector<Prediction>{{0.0, 1.0}}, niche);
    CHECK(std::abs(p - 0.6826894921370859) < 1e-12);
  }
  SUBCASE("an unbounded niche has probability one") {
    const Niche all{1, {Interval{-kInf, kInf}}};
    CHECK(membership_probability(std::vector<Prediction>{{123.0, 50.0}}, all) == 1.0);
  }
  SUBCASE("probabilities multiply over features and stay in [0,1]") {
    const Niche niche{1, {Interval{0.0, 1.0}, Interval{0.0, 1.0}}};
    const std::vector<Prediction> preds = {{0.5, 0.25}, {0.5, 0.25}};
    const double single = membership_probability(
        std::vector<Prediction>{{0.5, 0.25}}, Niche{1, {Interval{0.0, 1.0}}});
    const double joint = membership_probability(preds, niche);
    CHECK(joint == doctest::Approx(single * single).epsilon(1e-12));
    CHECK(joint >= 0.0);
    CHECK(joint <= 1.0);
  }
  SUBCASE("disjoint exhaustive partitions sum to at most one") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
      // Partition of the real line into four cells.
      std::vector<double> cuts = {rng.uniform(-2, 0), rng.uniform(0, 1),
                                  rng.uniform(1, 3)};
      std::sort(cuts.begin(), cuts.end());
      const std::vector<Interval> cells = {Interval{-kInf, cuts[0]},
                                           Interval{cuts[0], cuts[1]},
                                           Interval{cuts[1], cuts[2]},
                                           Interval{cuts[2], kInf}};
      const Prediction pred{rng.uniform(-3, 3), rng.uniform(0.0, 4.0)};
      double total = 0.0;
      for (const Interval& cell : cells) {
        total += membership_probability(std::vector<Prediction>{pred},
                                        Niche{1, {cell}});
      }
      CHECK(total <= 1.0 + 1e-9);
      CHECK(total >= 1.0 - 1e-9);  // exhaustive partition
    }
  }
}

TEST_CASE("expected joint improvement of elites") {
  SUBCASE("a single certain niche collapses to plain expected improvement") {
    const NicheSet niches = single_niche(Interval{-kInf, kInf});
    const Prediction objective{0.3, 0.8};
    const std::vector<Prediction> features = {{0.0, 1.0}};
    const std::vector<std::optional<double>> f_min = {1.2};
    const double value = ejie(objective, features, niches, f_min, 100.0);
    CHECK(std::abs(value - expected_improvement(objective, 1.2)) < 1e-12);
  }
  SUBCASE("weighted sum across niches") {
    // Feature belief N(1, 1) against bounds [1, inf): probability 1/2 each.
    NicheSet niches;
    niches.niches = {Niche{1, {Interval{1.0, kInf}}},
                     Niche{2, {Interval{1.0, kInf}}}};
    const Prediction objective{0.0, 0.0};  // deterministic objective 0
    const std::vector<Prediction> features = {{1.0, 1.0}};
    const std::vector<std::optional<double>> f_min = {0.2, 0.4};
    // EIs are exactly 0.2 and 0.4, probabilities exactly 0.5.
    const double value = ejie(objective, features, niches, f_min, 100.0);
    CHECK(value == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("zero improvement everywhere gives zero") {
    NicheSet niches;
    niches.niches = {Niche{1, {Interval{0.0, 1.0}}},
                     Niche{2, {Interval{0.0, kInf}}}};
    const Prediction objective{5.0, 0.0};
    const std::vector<Prediction> features = {{0.5, 0.1}};
    const std::vector<std::optional<double>> f_min = {1.0, 2.0};
    CHECK(ejie(objective, features, niches, f_min, 100.0) == 0.0);
  }
  SUBCASE("empty niches use the stand-in incumbent") {
    const NicheSet niches = single_niche(Interval{-kInf, kInf});
    const Prediction objective{5.0, 0.0};
    const std::vector<Prediction> features = {{0.0, 0.0}};
    const std::vector<std::optional<double>> f_min = {std::nullopt};
    CHECK(ejie(objective, features, niches, f_min, 100.0) == 95.0);
  }
}

TEST_CASE("EJIE-ranked proposals collapse to EI-ranked proposals") {
  // One unbounded niche makes the membership factor identically one, so the
  // two acquisition functions must select the same candidates.
  ParamSpace ps;
  ps.dims.push_back(CategoricalDim{"a", {"0", "1", "2"}});
  ps.dims.push_back(CategoricalDim{"b", {"0", "1", "2"}});
  const SearchSpace space = ps;
  const Encoder encoder(space);

  NicheSet single;
  single.niches = {Niche{1, {Interval{}}}};

  Rng data_rng(55);
  std::vector<std::vector<double>> design;
  std::vector<double> objective_targets;
  std::vector<double> feature_targets;
  for (int i = 0; i < 12; ++i) {
    const Configuration config = sample_random(space, data_rng);
    design.push_back(encoder.encode(config));
    objective_targets.push_back(data_rng.uniform());
    feature_targets.push_back(data_rng.uniform());
  }
  Rng fit_rng(56);
  const RandomForest objective_model =
      RandomForest::fit(design, objective_targets, ForestParams{}, fit_rng);
  const RandomForest feature_model =
      RandomForest::fit(design, feature_targets, ForestParams{}, fit_rng);

  AcquisitionContext context;
  context.objective_model = &objective_model;
  context.feature_models = {&feature_model};
  context.niches = &single;
  context.f_min = {0.4};

  const auto ejie_score = [&](const Configuration& candidate) {
    return ejie(context, encoder.encode(candidate));
  };
  const auto ei_score = [&](const Configuration& candidate) {
    return expected_improvement(
        objective_model.predict(encoder.encode(candidate)), 0.4);
  };

  ParamConfig incumbent;
  incumbent.values = {1, 1};
  const std::unordered_set<std::string> no_keys;
  for (int iteration = 0; iteration < 5; ++iteration) {
    Rng r1(100 + iteration), r2(100 + iteration);
    const auto by_ejie = propose_by_mutation(
        ejie_score, {incumbent}, space, 32, r1, 3, no_keys);
    const auto by_ei =
        propose_by_mutation(ei_score, {incumbent}, space, 32, r2, 3, no_keys);
    REQUIRE(by_ejie.size() == by_ei.size());
    for (std::size_t i = 0; i < by_ejie.size(); ++i) {
      CHECK(canonical_key(by_ejie[i], space) ==
            canonical_key(by_ei[i], space));
    }
  }
}

TEST_CASE("augmented Tchebycheff scalarization") {
  SUBCASE("worked example") {
    const std::vector<double> f = {0.2, 0.6};
    const std::vector<double> w = {0.5, 0.5};
    CHECK(scalarize_tchebycheff(f, w, 0.05) ==
          doctest::Approx(0.32).epsilon(1e-12));
  }
  SUBCASE("one-hot weights with gamma zero select an objective") {
    const std::vector<double> f = {0.7, 0.2};
    CHECK(scalarize_tchebycheff(f, std::vector<double>{0.0, 1.0}, 0.0) == 0.2);
    CHECK(scalarize_tchebycheff(f, std::vector<double>{1.0, 0.0}, 0.0) == 0.7);
  }
  SUBCASE("the zero vector maps to zero") {
    CHECK(scalarize_tchebycheff(std::vector<double>{0.0, 0.0},
                                std::vector<double>{0.3, 0.7}, 0.05) == 0.0);
  }
  SUBCASE("monotone in every positively weighted objective") {
    Rng rng(21);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<double> f = {rng.uniform(), rng.uniform(), rng.uniform()};
      std::vector<double> w = {rng.uniform(), rng.uniform(), rng.uniform()};
      const double base = scalarize_tchebycheff(f, w, 0.05);
      const std::size_t i = rng.index(3);
      f[i] += rng.uniform(0.0, 0.5);
      CHECK(scalarize_tchebycheff(f, w, 0.05) >= base - 1e-12);
    }
  }
  SUBCASE("dimension mismatch is an error") {
    CHECK_THROWS_AS(scalarize_tchebycheff(std::vector<double>{1.0},
                                          std::vector<double>{0.5, 0.5}, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("weight grid enumeration") {
  SUBCASE("k=2, s=4") {
    const auto grid = weight_grid(2, 4);
    const std::vector<std::vector<double>> expected = {
        {0.0, 1.0}, {0.25, 0.75}, {0.5, 0.5}, {0.75, 0.25}, {1.0, 0.0}};
    CHECK(grid == expected);
  }
  SUBCASE("k=2, s=1 endpoints") {
    const auto grid = weight_grid(2, 1);
    CHECK(grid == std::vector<std::vector<double>>{{0.0, 1.0}, {1.0, 0.0}});
  }
  SUBCASE("k=3, s=2 has six vectors") {
    CHECK(weight_grid(3, 2).size() == 6);
  }
  SUBCASE("cardinality matches the binomial for k <= 4, s <= 10") {
    for (int k = 2; k <= 4; ++k) {
      for (int s = 1; s <= 10; ++s) {
        const auto grid = weight_grid(k, s);
        CHECK(static_cast<double>(grid.size()) == binomial(s + k - 1, k - 1));
        for (const auto& w : grid) {
          double sum = 0.0;
          for (const double v : w) sum += v;
          CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("proposal by mutation") {
  ParamSpace ps;
  ps.dims.push_back(CategoricalDim{"a", {"0", "1"}});
  ps.dims.push_back(CategoricalDim{"b", {"0", "1"}});
  const SearchSpace space = ps;
  const std::unordered_set<std::string> no_keys;

  auto value_of = [](const Configuration& c) {
    const auto& values = std::get<ParamConfig>(c).values;
    return std::get<int>(values[0]) * 2 + std::get<int>(values[1]);
  };

  SUBCASE("returns the true neighbourhood argmax") {
    // Injective score over the 4 configurations; the neighbourhood of (0,0)
    // is {(1,0),(0,1)} and (1,0) scores higher.
    ParamConfig origin;
    origin.values = {0, 0};
    const auto score = [&](const Configuration& c) {
      return static_cast<double>(value_of(c));
    };
    Rng rng(5);
    const auto batch =
        propose_by_mutation(score, {origin}, space, 64, rng, 1, no_keys);
    REQUIRE(batch.size() == 1);
    CHECK(value_of(batch[0]) == 2);  // (1,0)
  }

  SUBCASE("stable tie-break keeps the earliest generated candidate") {
    ParamConfig origin;
    origin.values = {0, 0};
    const auto zero_score = [](const Configuration&) { return 0.0; };
    Rng rng(6);
    Rng mirror(6);
    const Configuration expected = mutate_local(origin, space, mirror);
    const auto batch =
        propose_by_mutation(zero_score, {origin}, space, 16, rng, 1, no_keys);
    REQUIRE(batch.size() == 1);
    CHECK(canonical_key(batch[0], space) == canonical_key(expected, space));
  }

  SUBCASE("archived configurations are not re-proposed when avoidable") {
    ParamConfig origin;
    origin.values = {0, 0};
    const auto score = [&](const Configuration& c) {
      return static_cast<double>(value_of(c));
    };
    std::unordered_set<std::string> keys;
    ParamConfig best;
    best.values = {1, 0};
    keys.insert(canonical_key(Configuration{best}, space));
    Rng rng(7);
    const auto batch =
        propose_by_mutation(score, {origin}, space, 64, rng, 1, keys);
    REQUIRE(batch.size() == 1);
    CHECK(value_of(batch[0]) != 2);
  }

  SUBCASE("without incumbents proposals fall back to random search") {
    const auto score = [&](const Configuration& c) {
      return static_cast<double>(value_of(c));
    };
    Rng r1(8), r2(8);
    const auto with_fallback =
        propose_by_mutation(score, {}, space, 32, r1, 2, no_keys);
    const auto direct =
        propose_by_random_search(score, space, 32, r2, 2, no_keys);
    REQUIRE(with_fallback.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(canonical_key(with_fallback[i], space) ==
            canonical_key(direct[i], space));
    }
  }
}

TEST_CASE("proposal by random search") {
  ParamSpace ps;
  ps.dims.push_back(CategoricalDim{"a", {"0", "1"}});
  const SearchSpace space = ps;
  const std::unordered_set<std::string> no_keys;
  const auto score = [](const Configuration& c) {
    return static_cast<double>(
        std::get<int>(std::get<ParamConfig>(c).values[0]));
  };

  SUBCASE("n_candidates == batch returns everything, best first") {
    Rng rng(9);
    const auto batch =
        propose_by_random_search(score, space, 2, rng, 2, no_keys);
    REQUIRE(batch.size() == 2);
    CHECK(score(batch[0]) >= score(batch[1]));
    const std::set<std::string> keys = {canonical_key(batch[0], space),
                                        canonical_key(batch[1], space)};
    CHECK(keys.size() == 2);  // within-batch dedup on a 2-point space
  }

  SUBCASE("fixed seed gives identical proposals") {
    Rng r1(10), r2(10);
    const auto b1 = propose_by_random_search(score, space, 8, r1, 2, no_keys);
    const auto b2 = propose_by_random_search(score, space, 8, r2, 2, no_keys);
    REQUIRE(b1.size() == b2.size());
    for (std::size_t i = 0; i < b1.size(); ++i) {
      CHECK(canonical_key(b1[i], space) == canonical_key(b2[i], space));
    }
  }

  SUBCASE("the higher-scored point of a 2-point space ranks first") {
    Rng rng(11);
    const auto batch =
        propose_by_random_search(score, space, 16, rng, 1, no_keys);
    REQUIRE(batch.size() == 1);
    CHECK(score(batch[0]) == 1.0);
  }

  SUBCASE("precondition violations throw") {
    Rng rng(12);
    CHECK_THROWS_AS(propose_by_random_search(score, space, 1, rng, 2, no_keys),
                    std::invalid_argument);
  }
}
