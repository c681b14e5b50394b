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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparselab/maskgen.hpp"
#include "sparselab/nn/config.hpp"
#include "sparselab/train/dataset.hpp"
#include "sparselab/train/sweep.hpp"
#include "sparselab/train/trainer.hpp"
#include "sparselab/train/trajectory.hpp"

namespace sparselab::cli {

// Bad flags, malformed config files, schema violations. Exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json load_config_file(const std::filesystem::path& path);

// "a.b.c=value". The value is read as JSON when it parses, else as a string.
void apply_override(nlohmann::json& config, std::string_view assignment);

// Rejects unknown keys, wrong types and bad enum values.
void validate_config(const nlohmann::json& config);

struct DataConfig {
  std::string source = "synthetic";  // "synthetic" or "files"
  // synthetic
  SynthKind task = SynthKind::kAdjacentDuplicate;
  std::size_t train_size = 2000;
  std::size_t val_size = 500;
  std::size_t length = 12;
  std::size_t alphabet = 4;
  std::uint64_t seed = 0;
  // files
  std::optional<std::filesystem::path> train, val, vocab, train_trees, val_trees, embeddings;
  int num_classes = 2;
};

struct MasksConfig {
  std::string pattern = "NEIGHBOUR(1)";
  std::string format = "json";  // "json" or "binary"
  std::string split = "train";  // which data split to mask
};

struct StatsConfig {
  std::vector<std::string> inputs;    // mask files
  std::vector<std::string> patterns;  // or patterns applied to the data
  std::string split = "train";
};

struct SweepConfig {
  std::string mode = "fixed";
  std::vector<std::string> patterns;
  std::vector<PlanDirection> directions{PlanDirection::kAllButLast};
  std::vector<int> pivots{1};
  std::vector<std::uint64_t> seeds{0};
  std::vector<double> lambdas;
  std::vector<double> init_sparsities;
  unsigned threads = 0;
};

struct ReportConfig {
  std::vector<std::string> inputs;
  train::CurveOptions curve;
};

struct RunConfig {
  nlohmann::json raw;  // validated input after overrides
  DataConfig data;
  nn::EncoderConfig model = nn::EncoderConfig::desk();
  train::TrainConfig train = train::TrainConfig::desk();
  std::string mode = "fixed";  // train.mode: "fixed" or "learned"
  std::string plan_pattern = "DENSE";
  train::FixedPlan plan;  // resolved from plan_pattern and train.seed
  MasksConfig masks;
  StatsConfig stats;
  SweepConfig sweep;
  ReportConfig report;
};

// Validates, then resolves presets and defaults.
RunConfig parse_run_config(const nlohmann::json& config);

// Pattern labels as in Pattern::label, with the seed optional for RANDOM
// and BIGBIRD: "RANDOM", "BIGBIRD(2,3,0)". Missing seeds take `seed`.
train::MaskSpec parse_mask_spec(std::string_view label, std::uint64_t seed);

}  // namespace sparselab::cli
