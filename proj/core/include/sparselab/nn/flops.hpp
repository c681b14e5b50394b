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
#include <vector>

#include "sparselab/maskgen.hpp"
#include "sparselab/nn/config.hpp"
#include "sparselab/nn/degrees.hpp"

namespace sparselab::nn {

// Multiply-add counts (2 flops each) for one sequence of length n.
struct LayerFlops {
  std::uint64_t projections = 0;       // Q, K, V and output projections
  std::uint64_t attention_scores = 0;  // Q K^T over allowed cells
  std::uint64_t attention_values = 0;  // probs V over allowed cells
  std::uint64_t feed_forward = 0;
  // Allowed cells summed over heads, and the dense count H n^2.
  std::uint64_t allowed_cells = 0;
  std::uint64_t dense_cells = 0;

  std::uint64_t total() const {
    return projections + attention_scores + attention_values + feed_forward;
  }
};

struct FlopEstimate {
  std::vector<LayerFlops> layers;

  std::uint64_t total() const;
  std::uint64_t attention_scores() const;
};

// Attention work scales with the allowed cells of each layer's mask, so a
// layer with mask sparsity s costs (1 - s) of its dense attention-score count.
FlopEstimate flop_estimate(const LayerMaskPlan& plan, std::size_t n, const EncoderConfig& config);

// Learned degrees: every layer but the last uses the hard band of degree
// ceil(delta n) per head.
FlopEstimate flop_estimate(const DegreeParams& degrees, std::size_t n,
                           const EncoderConfig& config);

}  // namespace sparselab::nn
