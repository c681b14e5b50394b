// Copyright 2026 The Sparselab Authors.
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

#include "sparselab/graphstats.hpp"
#include "sparselab/maskgen.hpp"

namespace {

using namespace sparselab;

void BM_StatsNeighbour(benchmark::State& state) {
  const auto mask = neighbour_mask(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(stats(mask));
}
BENCHMARK(BM_StatsNeighbour)->RangeMultiplier(4)->Range(16, 1024);

void BM_StatsRandom(benchmark::State& state) {
  const auto mask = matched_random_mask(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(stats(mask));
}
BENCHMARK(BM_StatsRandom)->RangeMultiplier(4)->Range(16, 1024);

void BM_StatsBigBird(benchmark::State& state) {
  const auto mask = bigbird_mask(static_cast<std::size_t>(state.range(0)), 2, 3, 3, 7);
  for (auto _ : state) benchmark::DoNotOptimize(stats(mask));
}
BENCHMARK(BM_StatsBigBird)->RangeMultiplier(4)->Range(16, 1024);

}  // namespace
