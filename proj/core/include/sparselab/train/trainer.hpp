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
#include <optional>
#include <span>
#include <vector>

#include "sparselab/maskgen.hpp"
#include "sparselab/nn/degrees.hpp"
#include "sparselab/nn/encoder.hpp"
#include "sparselab/nn/params.hpp"
#include "sparselab/train/dataset.hpp"

namespace sparselab::train {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double warmup_ratio = 0.1;
  std::uint64_t seed = 0;
  double lambda = 0.0;         // weight of the density regularizer
  double init_sparsity = 0.5;  // learned runs: starting model sparsity
  double temperature = nn::kDefaultTemperature;

  void validate() const;

  // Tiny-model defaults for the synthetic tasks.
  static TrainConfig desk();
  // BERT finetuning defaults: 10 epochs, lr 5e-5, warmup 0.1, batch 32.
  static TrainConfig large();
};

// Which layers are sparsified and with what per-instance pattern. A DENSE
// mask spec yields a fully dense model.
struct FixedPlan {
  MaskSpec mask;
  PlanDirection direction = PlanDirection::kAllButLast;
  int pivot = 1;
  bool operator==(const FixedPlan&) const = default;
};

struct StepRecord {
  std::size_t step = 0;
  double task_loss = 0;
  double reg_value = 0;
  double total_loss = 0;
};

// Epoch 0 holds the metrics of the initial model; its training fields are 0.
struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;  // mean total loss over the epoch's steps
  double task_loss = 0;   // mean cross-entropy over the epoch's steps
  double reg_value = 0;   // mean density regularizer over the epoch's steps
  double train_accuracy = 0;
  double val_loss = 0;
  double val_accuracy = 0;
  double model_sparsity = 0;
  // Density regularizer and thetas after the epoch's last step (learned runs).
  double end_reg_value = 0;
  std::vector<double> thetas;
};

struct Trajectory {
  std::vector<EpochRecord> epochs;
  std::vector<StepRecord> steps;
};

struct TrainResult {
  Trajectory trajectory;
  nn::ModelParams params;
  std::optional<nn::DegreeParams> degrees;
};

// Per-example plans for a fixed-pattern run. Train and validation sets use
// different mask seeds.
std::vector<LayerMaskPlan> build_plans(const FixedPlan& plan, const EncodedDataset& data,
                                       int num_layers, bool validation);

// Mean sparsity of the sparsified layers over the examples' plans.
double plan_sparsity(std::span<const LayerMaskPlan> plans);

struct Evaluation {
  double accuracy = 0;
  double loss = 0;
};

// Argmax accuracy and mean cross-entropy. `plans` is empty or has one plan
// per example.
Evaluation evaluate(const nn::ModelParams& params, const EncodedDataset& data,
                    std::span<const LayerMaskPlan> plans = {},
                    const nn::DegreeParams* degrees = nullptr, int batch_size = 64);

// Mean model_sparsity over the example lengths of `data`.
double learned_sparsity(const nn::DegreeParams& degrees, const EncodedDataset& data);

// Fixed-pattern finetuning. lambda is ignored.
TrainResult train_fixed(const nn::EncoderConfig& model, const TrainConfig& config,
                        const FixedPlan& plan, const EncodedDataset& train,
                        const EncodedDataset& val);

// Joint optimisation of the encoder and per-head neighbour degrees under
// task loss + lambda * density_regularizer. The last layer stays dense.
TrainResult train_learned(const nn::EncoderConfig& model, const TrainConfig& config,
                          const EncodedDataset& train, const EncodedDataset& val);

}  // namespace sparselab::train
