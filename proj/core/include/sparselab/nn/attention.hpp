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

#include <Eigen/Core>

#include "sparselab/maskgen.hpp"
#include "sparselab/nn/params.hpp"

namespace sparselab::nn {

// Logit assigned to disallowed cells of a hard mask.
inline constexpr double kMaskedLogit = -1e9;
// Added inside log(m + eps) for soft masks.
inline constexpr double kSoftMaskEpsilon = 1e-12;

using ConstRef = Eigen::Ref<const Matrix>;
using MutRef = Eigen::Ref<Matrix>;

// At most one of `hard` and `soft` is set; neither means dense attention.
// Disallowed hard cells are excluded from the softmax (their logit is
// replaced by kMaskedLogit); soft weights m shift the logits by
// log(m + kSoftMaskEpsilon).
struct MaskRef {
  const AttnMask* hard = nullptr;
  const Matrix* soft = nullptr;
};

// probs = softmax(Q K^T * scale + mask), out = probs V. Throws
// StructuralError if a hard-masked row has no allowed cell.
void attention_forward(const ConstRef& q, const ConstRef& k, const ConstRef& v,
                       MaskRef mask, double scale, Matrix& probs, MutRef out);

// Gradients of attention_forward given the cached probabilities. `dlogits`,
// when non-null, receives dLoss/d(pre-softmax logits), which is also the
// gradient with respect to the additive soft-mask term.
void attention_backward(const ConstRef& q, const ConstRef& k, const ConstRef& v,
                        const Matrix& probs, const ConstRef& dout, double scale,
                        MutRef dq, MutRef dk, MutRef dv, Matrix* dlogits = nullptr);

// Single-head conveniences with scale 1/sqrt(d_head).
Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v);
Matrix masked_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                        const AttnMask& mask, Matrix* probs = nullptr);
Matrix masked_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                        const Matrix& soft_mask, Matrix* probs = nullptr);

}  // namespace sparselab::nn
