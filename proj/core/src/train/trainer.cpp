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

#include "sparselab/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "sparselab/error.hpp"
#include "sparselab/train/optimizer.hpp"

namespace sparselab::train {

namespace {

constexpr std::uint64_t kValidationSeedSalt = 0x5EED5A17ULL;

void check_datasets(const nn::EncoderConfig& model, const EncodedDataset& train,
                    const EncodedDataset& val) {
  if (train.size() == 0) throw StructuralError("training set is empty");
  if (val.size() == 0) throw StructuralError("validation set is empty");
  const std::size_t longest = std::max(train.max_length(), val.max_length());
  if (longest > static_cast<std::size_t>(model.max_len)) {
    throw StructuralError("sequence of length " + std::to_string(longest) +
                          " exceeds max_len " + std::to_string(model.max_len));
  }
  if (train.num_classes != model.num_classes || val.num_classes != model.num_classes) {
    throw StructuralError("dataset class count does not match the encoder");
  }
}

struct Batch {
  std::vector<nn::EncoderExample> inputs;
  std::vector<int> labels;
};

Batch make_batch(const EncodedDataset& data, std::span<const std::size_t> order,
                 std::span<const LayerMaskPlan> plans) {
  Batch b;
  b.inputs.reserve(order.size());
  b.labels.reserve(order.size());
  for (auto k : order) {
    const auto& e = data.examples[k];
    b.inputs.push_back({e.ids, plans.empty() ? nullptr : &plans[k]});
    b.labels.push_back(e.label);
  }
  return b;
}

int count_correct(const nn::Matrix& logits, std::span<const int> labels) {
  const auto pred = nn::argmax_rows(logits);
  int correct = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) correct += pred[k] == labels[k] ? 1 : 0;
  return correct;
}

// Shared loop for fixed and learned runs; `degrees` is null for fixed runs.
TrainResult run(const nn::EncoderConfig& model, const TrainConfig& config,
                const EncodedDataset& train, const EncodedDataset& val,
                std::span<const LayerMaskPlan> train_plans,
                std::span<const LayerMaskPlan> val_plans,
                std::optional<nn::DegreeParams> degrees) {
  config.validate();
  check_datasets(model, train, val);

  TrainResult result{Trajectory{}, nn::ModelParams::initialized(model, config.seed),
                     std::move(degrees)};
  nn::ModelParams& params = result.params;
  nn::DegreeParams* deg = result.degrees ? &*result.degrees : nullptr;
  const double lambda = deg != nullptr ? config.lambda : 0.0;

  nn::ModelParams grads(model);
  AdamState model_state(params.values().size());
  const std::size_t theta_count = deg != nullptr ? static_cast<std::size_t>(deg->thetas().size()) : 0;
  AdamState theta_state(theta_count);
  nn::Matrix theta_grad;

  std::mt19937_64 shuffle_rng(config.seed ^ 0xA5A5A5A5ULL);
  std::mt19937_64 dropout_rng(config.seed ^ 0x0D0D0D0DULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  const std::size_t steps_per_epoch = (train.size() + batch_size - 1) / batch_size;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(config.epochs);

  auto sparsity_now = [&] {
    return deg != nullptr ? learned_sparsity(*deg, val) : plan_sparsity(val_plans);
  };
  auto snapshot = [&](EpochRecord& rec) {
    const Evaluation ev = evaluate(params, val, val_plans, deg);
    rec.val_accuracy = ev.accuracy;
    rec.val_loss = ev.loss;
    rec.model_sparsity = sparsity_now();
    if (deg != nullptr) {
      rec.end_reg_value = nn::density_regularizer(*deg);
      rec.thetas.assign(deg->thetas().data(), deg->thetas().data() + deg->thetas().size());
    }
  };

  {
    EpochRecord initial;
    snapshot(initial);
    result.trajectory.epochs.push_back(std::move(initial));
  }

  std::size_t step = 0;
  nn::ForwardTrace trace;
  nn::Matrix dlogits;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochRecord rec;
    rec.epoch = epoch;
    int correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      const Batch batch = make_batch(
          train, std::span<const std::size_t>(order).subspan(start, stop - start), train_plans);
      nn::ForwardOptions options{.degrees = deg, .training = true, .rng = &dropout_rng};
      const nn::Matrix logits = nn::encoder_forward(params, batch.inputs, options, &trace);
      const double task_loss = nn::cross_entropy(logits, batch.labels, &dlogits);
      correct += count_correct(logits, batch.labels);

      grads.set_zero();
      double reg = 0.0;
      if (deg != nullptr) {
        theta_grad.setZero(deg->num_heads(), deg->num_layers());
        nn::backward(params, trace, dlogits, grads, deg, &theta_grad);
        reg = nn::density_regularizer(*deg);
        theta_grad += lambda * nn::density_regularizer_grad(*deg);
      } else {
        nn::backward(params, trace, dlogits, grads);
      }
      const double total = task_loss + lambda * reg;
      ++step;
      result.trajectory.steps.push_back({step, task_loss, reg, total});
      rec.task_loss += task_loss;
      rec.reg_value += reg;
      rec.train_loss += total;

      const double lr = warmup_lr(config.learning_rate, config.warmup_ratio, total_steps, step);
      adam_step(params.values(), grads.values(), model_state, lr);
      if (deg != nullptr) {
        adam_step(std::span<double>(deg->thetas().data(), theta_count),
                  std::span<const double>(theta_grad.data(), theta_count), theta_state, lr);
      }
    }
    const auto steps = static_cast<double>(steps_per_epoch);
    rec.task_loss /= steps;
    rec.reg_value /= steps;
    rec.train_loss /= steps;
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    snapshot(rec);
    result.trajectory.epochs.push_back(std::move(rec));
  }
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs <= 0) throw StructuralError("epochs must be positive");
  if (batch_size <= 0) throw StructuralError("batch_size must be positive");
  if (!(learning_rate > 0)) throw StructuralError("learning_rate must be positive");
  if (!(warmup_ratio >= 0 && warmup_ratio < 1)) throw StructuralError("warmup_ratio must be in [0, 1)");
  if (!(lambda >= 0)) throw StructuralError("lambda must be >= 0");
  if (!(init_sparsity > 0 && init_sparsity < 1)) throw StructuralError("init_sparsity must be in (0, 1)");
  if (!(temperature > 0)) throw StructuralError("temperature must be positive");
}

TrainConfig TrainConfig::desk() { return TrainConfig{}; }

TrainConfig TrainConfig::large() {
  return TrainConfig{.epochs = 10, .batch_size = 32, .learning_rate = 5e-5, .warmup_ratio = 0.1};
}

std::vector<LayerMaskPlan> build_plans(const FixedPlan& plan, const EncodedDataset& data,
                                       int num_layers, bool validation) {
  if (plan.mask.kind == PatternKind::kDense) return {};
  MaskSpec spec = plan.mask;
  if (validation) spec.seed ^= kValidationSeedSalt;
  const auto flags = sparsified_layers(plan.direction, plan.pivot, num_layers);
  std::vector<LayerMaskPlan> out;
  out.reserve(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    auto mask = std::make_shared<const AttnMask>(instance_mask(spec, data.examples[k], k));
    std::vector<std::shared_ptr<const AttnMask>> per_layer(flags.size());
    for (std::size_t l = 0; l < flags.size(); ++l) {
      if (flags[l]) per_layer[l] = mask;
    }
    out.emplace_back(std::move(per_layer));
  }
  return out;
}

double plan_sparsity(std::span<const LayerMaskPlan> plans) {
  double total = 0;
  std::size_t count = 0;
  for (const auto& p : plans) {
    for (int l = 0; l < p.num_layers(); ++l) {
      if (const AttnMask* m = p.mask(l)) {
        total += m->sparsity();
        ++count;
      }
    }
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

Evaluation evaluate(const nn::ModelParams& params, const EncodedDataset& data,
                    std::span<const LayerMaskPlan> plans, const nn::DegreeParams* degrees,
                    int batch_size) {
  if (data.size() == 0) throw StructuralError("cannot evaluate an empty dataset");
  if (!plans.empty() && plans.size() != data.size()) {
    throw StructuralError("one plan per example required");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto step = static_cast<std::size_t>(std::max(batch_size, 1));
  int correct = 0;
  double loss = 0;
  nn::ForwardTrace trace;
  for (std::size_t start = 0; start < order.size(); start += step) {
    const std::size_t stop = std::min(order.size(), start + step);
    const Batch batch =
        make_batch(data, std::span<const std::size_t>(order).subspan(start, stop - start), plans);
    const nn::Matrix logits =
        nn::encoder_forward(params, batch.inputs, {.degrees = degrees}, &trace);
    correct += count_correct(logits, batch.labels);
    loss += nn::cross_entropy(logits, batch.labels) * static_cast<double>(stop - start);
  }
  const auto n = static_cast<double>(data.size());
  return Evaluation{static_cast<double>(correct) / n, loss / n};
}

double learned_sparsity(const nn::DegreeParams& degrees, const EncodedDataset& data) {
  if (data.size() == 0) return 0.0;
  const auto flags = nn::learned_sparse_layers(degrees.num_layers());
  std::map<std::size_t, std::size_t> lengths;
  for (const auto& e : data.examples) ++lengths[e.ids.size()];
  double total = 0;
  for (auto [n, count] : lengths) {
    total += nn::model_sparsity(degrees, n, flags) * static_cast<double>(count);
  }
  return total / static_cast<double>(data.size());
}

TrainResult train_fixed(const nn::EncoderConfig& model, const TrainConfig& config,
                        const FixedPlan& plan, const EncodedDataset& train,
                        const EncodedDataset& val) {
  model.validate();
  check_datasets(model, train, val);
  const auto train_plans = build_plans(plan, train, model.num_layers, false);
  const auto val_plans = build_plans(plan, val, model.num_layers, true);
  return run(model, config, train, val, train_plans, val_plans, std::nullopt);
}

TrainResult train_learned(const nn::EncoderConfig& model, const TrainConfig& config,
                          const EncodedDataset& train, const EncodedDataset& val) {
  model.validate();
  config.validate();
  check_datasets(model, train, val);
  if (model.num_layers < 2) throw StructuralError("learned degrees need at least two layers");
  // Initial degrees target init_sparsity at the most common training length.
  std::map<std::size_t, std::size_t> lengths;
  for (const auto& e : train.examples) ++lengths[e.ids.size()];
  const auto common = std::max_element(lengths.begin(), lengths.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
  auto degrees = nn::degrees_for_sparsity(model.num_heads, model.num_layers,
                                          std::max<std::size_t>(common->first, 2),
                                          config.init_sparsity, config.temperature);
  return run(model, config, train, val, {}, {}, std::move(degrees));
}

}  // namespace sparselab::train
