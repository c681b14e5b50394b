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
#include <random>
#include <span>
#include <vector>

#include "sparselab/maskgen.hpp"
#include "sparselab/nn/degrees.hpp"
#include "sparselab/nn/params.hpp"

namespace sparselab::nn {

// One input sequence. Position 0 is the classification position. A null plan
// means dense attention everywhere.
struct EncoderExample {
  std::span<const int> tokens;
  const LayerMaskPlan* plan = nullptr;
};

struct ForwardOptions {
  // When set, every layer but the last uses per-head soft neighbour masks
  // and any per-example plan is ignored. The last layer stays dense.
  const DegreeParams* degrees = nullptr;
  // Dropout is active only when training with config().dropout > 0.
  bool training = false;
  std::mt19937_64* rng = nullptr;
};

struct LayerNormCache {
  Matrix normalized;  // (x - mean) / std
  Eigen::VectorXd inv_std;
};

struct LayerTrace {
  Matrix input;
  LayerNormCache ln1;
  Matrix ln1_out, q, k, v;
  Matrix context;  // concatenated head outputs
  Matrix residual; // input + attention branch
  LayerNormCache ln2;
  Matrix ln2_out, ff_pre, ff_act;
  Matrix attn_dropout, ff_dropout;  // scaled keep masks; empty when unused
  // Indexed [example * H + head].
  std::vector<Matrix> probs;
  std::vector<Matrix> soft_masks;
  std::vector<const AttnMask*> hard_masks;
};

// Activations cached by encoder_forward for an exact backward pass.
struct ForwardTrace {
  std::vector<std::size_t> offsets;  // first row of each example
  std::vector<std::size_t> lengths;
  std::vector<std::vector<int>> tokens;
  std::vector<LayerTrace> layers;
  Matrix cls_rows;  // final hidden rows at position 0 of each example
  LayerNormCache final_ln;
  Matrix cls_out;
  Matrix logits;
  bool used_degrees = false;
  // Per layer, number of (example, head) attention evaluations that used a
  // sparse hard mask or a soft degree mask.
  std::vector<std::size_t> mask_applications;
};

// Logits (batch x classes). Throws StructuralError when a sequence exceeds
// max_len, a token id is out of range, or a mask size does not match.
Matrix encoder_forward(const ModelParams& params, std::span<const EncoderExample> batch,
                       const ForwardOptions& options = {}, ForwardTrace* trace = nullptr);

// Accumulates dLoss/dparams into `grads` (same shapes as params) and, when
// degrees were used and `theta_grad` is non-null, dLoss/dtheta into
// `theta_grad` (H x L).
void backward(const ModelParams& params, const ForwardTrace& trace, const Matrix& dlogits,
              ModelParams& grads, const DegreeParams* degrees = nullptr,
              Matrix* theta_grad = nullptr);

// Mean softmax cross-entropy over the batch; writes dLoss/dlogits when asked.
double cross_entropy(const Matrix& logits, std::span<const int> labels,
                     Matrix* dlogits = nullptr);

std::vector<int> argmax_rows(const Matrix& logits);

}  // namespace sparselab::nn
