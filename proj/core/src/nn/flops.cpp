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

#include "sparselab/nn/flops.hpp"

#include "sparselab/error.hpp"

namespace sparselab::nn {

namespace {

LayerFlops base_layer(std::size_t n, const EncoderConfig& config) {
  const auto rows = static_cast<std::uint64_t>(n);
  const auto d = static_cast<std::uint64_t>(config.d_model);
  const auto ff = static_cast<std::uint64_t>(config.d_ff);
  LayerFlops f;
  f.projections = 2 * rows * d * d * 4;
  f.feed_forward = 2 * rows * d * ff * 2;
  f.dense_cells = static_cast<std::uint64_t>(config.num_heads) * rows * rows;
  return f;
}

void set_attention(LayerFlops& f, std::uint64_t allowed_cells, const EncoderConfig& config) {
  const auto dh = static_cast<std::uint64_t>(config.head_dim());
  f.allowed_cells = allowed_cells;
  f.attention_scores = 2 * allowed_cells * dh;
  f.attention_values = 2 * allowed_cells * dh;
}

}  // namespace

std::uint64_t FlopEstimate::total() const {
  std::uint64_t sum = 0;
  for (const auto& l : layers) sum += l.total();
  return sum;
}

std::uint64_t FlopEstimate::attention_scores() const {
  std::uint64_t sum = 0;
  for (const auto& l : layers) sum += l.attention_scores;
  return sum;
}

FlopEstimate flop_estimate(const LayerMaskPlan& plan, std::size_t n, const EncoderConfig& config) {
  if (plan.num_layers() != config.num_layers) {
    throw StructuralError("plan depth does not match the encoder");
  }
  FlopEstimate out;
  for (int l = 0; l < plan.num_layers(); ++l) {
    LayerFlops f = base_layer(n, config);
    const AttnMask* mask = plan.mask(l);
    if (mask != nullptr && mask->n() != n) throw StructuralError("mask size does not match n");
    const std::uint64_t cells = mask != nullptr ? mask->nnz() : n * n;
    set_attention(f, static_cast<std::uint64_t>(config.num_heads) * cells, config);
    out.layers.push_back(f);
  }
  return out;
}

FlopEstimate flop_estimate(const DegreeParams& degrees, std::size_t n,
                           const EncoderConfig& config) {
  if (degrees.num_layers() != config.num_layers || degrees.num_heads() != config.num_heads) {
    throw StructuralError("degree grid does not match the encoder");
  }
  FlopEstimate out;
  for (int l = 0; l < config.num_layers; ++l) {
    LayerFlops f = base_layer(n, config);
    std::uint64_t cells = 0;
    for (int h = 0; h < config.num_heads; ++h) {
      cells += l == config.num_layers - 1 ? n * n
                                          : band_nnz(n, hard_degree(degrees.delta(h, l), n));
    }
    set_attention(f, cells, config);
    out.layers.push_back(f);
  }
  return out;
}

}  // namespace sparselab::nn
