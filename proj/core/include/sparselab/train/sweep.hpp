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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparselab/nn/config.hpp"
#include "sparselab/train/trainer.hpp"

namespace sparselab::train {

void to_json(nlohmann::json& j, const TrainConfig& c);
void to_json(nlohmann::json& j, const MaskSpec& m);
void to_json(nlohmann::json& j, const FixedPlan& p);

// Canonical text of everything that determines a run; its hash keys outputs.
std::string run_key(const nn::EncoderConfig& model, const TrainConfig& config,
                    const FixedPlan* plan);

struct SweepGrid {
  std::vector<MaskSpec> masks;
  std::vector<PlanDirection> directions{PlanDirection::kAllButLast};
  std::vector<int> pivots{1};
  std::vector<std::uint64_t> seeds{0};
};

struct SweepEntry {
  FixedPlan plan;  // plan.mask.seed equals seed
  std::uint64_t seed = 0;
  bool operator==(const SweepEntry&) const = default;
};

// Unique entries in canonical order. DENSE masks collapse to one plan per
// seed; ALL_BUT_LAST ignores the pivot.
std::vector<SweepEntry> enumerate(const SweepGrid& grid);

struct SweepRow {
  SweepEntry entry;
  std::string config_hash;
  double accuracy = 0;  // final-epoch validation accuracy
  double sparsity = 0;
  Trajectory trajectory;
};

// Runs every entry (on up to `threads` workers; 0 picks the hardware count)
// and returns rows in canonical entry order.
std::vector<SweepRow> sweep_fixed(const nn::EncoderConfig& model, const TrainConfig& base,
                                  const SweepGrid& grid, const EncodedDataset& train,
                                  const EncodedDataset& val, unsigned threads = 0);

struct LearnedGrid {
  std::vector<double> lambdas;
  std::vector<double> init_sparsities;
  std::vector<std::uint64_t> seeds{0};
};

struct LearnedRow {
  TrainConfig config;
  std::string config_hash;
  double accuracy = 0;
  double sparsity = 0;
  Trajectory trajectory;
};

std::vector<LearnedRow> sweep_learned(const nn::EncoderConfig& model, const TrainConfig& base,
                                      const LearnedGrid& grid, const EncodedDataset& train,
                                      const EncodedDataset& val, unsigned threads = 0);

// Runs job(i) for i in [0, count) on a small worker pool. The first
// exception is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job);

}  // namespace sparselab::train
