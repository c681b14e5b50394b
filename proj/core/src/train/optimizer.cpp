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

#include "sparselab/train/optimizer.hpp"

#include <cmath>

#include "sparselab/error.hpp"

namespace sparselab::train {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double learning_rate, const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw StructuralError("adam_step size mismatch");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    state.m[k] = config.beta1 * state.m[k] + (1.0 - config.beta1) * g;
    state.v[k] = config.beta2 * state.v[k] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[k] / correction1;
    const double v_hat = state.v[k] / correction2;
    params[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

double warmup_lr(double base_lr, double warmup_ratio, std::size_t total_steps, std::size_t step) {
  const auto warm =
      static_cast<std::size_t>(std::ceil(warmup_ratio * static_cast<double>(total_steps)));
  if (warm == 0 || step >= warm) return base_lr;
  return base_lr * static_cast<double>(step) / static_cast<double>(warm);
}

}  // namespace sparselab::train
