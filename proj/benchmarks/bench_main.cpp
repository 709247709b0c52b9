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

#include <benchmark/benchmark.h>

#include <vector>

#include "qdopt/acquisition.hpp"
#include "qdopt/metrics.hpp"
#include "qdopt/multifidelity.hpp"
#include "qdopt/problems.hpp"
#include "qdopt/rng.hpp"
#include "qdopt/space.hpp"
#include "qdopt/surrogate.hpp"

namespace {

using namespace qdopt;

std::vector<std::vector<double>> random_points(int n, int dim,
                                               std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> points;
  points.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> p(dim);
    for (int d = 0; d < dim; ++d) p[d] = rng.uniform(0.0, 10.0);
    points.push_back(std::move(p));
  }
  return points;
}

void BM_ExpectedImprovement(benchmark::State& state) {
  const Prediction prediction{0.3, 0.8};
  for (auto _ : state) {
    benchmark::DoNotOptimize(expected_improvement(prediction, 1.0));
  }
}
BENCHMARK(BM_ExpectedImprovement);

void BM_Hypervolume2D(benchmark::State& state) {
  const auto points = random_points(static_cast<int>(state.range(0)), 2, 1);
  const std::vector<double> nadir = {10.0, 10.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hypervolume(points, nadir));
  }
}
BENCHMARK(BM_Hypervolume2D)->Arg(16)->Arg(64)->Arg(256);

void BM_ParetoFront(benchmark::State& state) {
  const auto points = random_points(static_cast<int>(state.range(0)), 2, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pareto_front(points));
  }
}
BENCHMARK(BM_ParetoFront)->Arg(64)->Arg(256);

void BM_ForestFit(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  Rng data_rng(3);
  std::vector<std::vector<double>> design;
  std::vector<double> targets;
  for (int i = 0; i < rows; ++i) {
    std::vector<double> x(16);
    for (auto& v : x) v = data_rng.uniform();
    design.push_back(std::move(x));
    targets.push_back(data_rng.uniform());
  }
  ForestParams params;
  params.n_trees = 100;
  for (auto _ : state) {
    Rng rng(7);
    benchmark::DoNotOptimize(RandomForest::fit(design, targets, params, rng));
  }
}
BENCHMARK(BM_ForestFit)->Arg(50)->Arg(200);

void BM_ForestPredict(benchmark::State& state) {
  Rng data_rng(4);
  std::vector<std::vector<double>> design;
  std::vector<double> targets;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(16);
    for (auto& v : x) v = data_rng.uniform();
    design.push_back(std::move(x));
    targets.push_back(data_rng.uniform());
  }
  Rng rng(8);
  const RandomForest forest =
      RandomForest::fit(design, targets, ForestParams{}, rng);
  const std::vector<double> probe = design.front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(forest.predict(probe));
  }
}
BENCHMARK(BM_ForestPredict);

void BM_ComputeSchedule(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_schedule(200.0, 3.0));
  }
}
BENCHMARK(BM_ComputeSchedule);

void BM_PathEncode(benchmark::State& state) {
  const Problem problem = toy_cell_problem();
  const auto encoder = shared_encoder(problem.space());
  Rng rng(5);
  const Configuration config = sample_random(problem.space(), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(encoder->encode(config));
  }
}
BENCHMARK(BM_PathEncode);

void BM_TopKQdo(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng data_rng(6);
  std::vector<double> objectives;
  std::vector<std::vector<bool>> memberships;
  for (int i = 0; i < n; ++i) {
    objectives.push_back(data_rng.uniform());
    memberships.push_back({data_rng.bernoulli(0.5), true});
  }
  for (auto _ : state) {
    Rng rng(9);
    benchmark::DoNotOptimize(
        top_k_qdo(objectives, memberships, n / 3, rng));
  }
}
BENCHMARK(BM_TopKQdo)->Arg(27)->Arg(81);

void BM_CanonicalKey(benchmark::State& state) {
  const Problem problem = toy_cell_problem();
  Rng rng(10);
  const Configuration config = sample_random(problem.space(), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(canonical_key(config, problem.space()));
  }
}
BENCHMARK(BM_CanonicalKey);

}  // namespace

BENCHMARK_MAIN();
