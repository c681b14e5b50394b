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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sparselab/nn/config.hpp"

namespace sparselab::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

enum class LayerTensor : int {
  kLn1Gain,
  kLn1Bias,
  kQueryWeight,
  kQueryBias,
  kKeyWeight,
  kKeyBias,
  kValueWeight,
  kValueBias,
  kOutWeight,
  kOutBias,
  kLn2Gain,
  kLn2Bias,
  kFf1Weight,
  kFf1Bias,
  kFf2Weight,
  kFf2Bias,
  kCount,
};

struct TensorInfo {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

// All encoder weights in one flat buffer. Tensors are row-major and laid out
// in canonical order: token embedding, position embedding, then per layer the
// LayerTensor sequence, then the final layer norm and the classifier. Weight
// matrices are (in x out) and act on row vectors; biases are 1 x out.
class ModelParams {
 public:
  explicit ModelParams(const EncoderConfig& config);

  // Weights ~ U(-0.05, 0.05), biases 0, layer-norm gains 1.
  static ModelParams initialized(const EncoderConfig& config, std::uint64_t seed);

  const EncoderConfig& config() const { return config_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  void set_zero();

  MatrixMap token_embedding() { return map(0); }
  ConstMatrixMap token_embedding() const { return map(0); }
  MatrixMap position_embedding() { return map(1); }
  ConstMatrixMap position_embedding() const { return map(1); }
  MatrixMap layer(int l, LayerTensor t) { return map(layer_index(l, t)); }
  ConstMatrixMap layer(int l, LayerTensor t) const { return map(layer_index(l, t)); }
  MatrixMap final_ln_gain() { return map(tail_index(0)); }
  ConstMatrixMap final_ln_gain() const { return map(tail_index(0)); }
  MatrixMap final_ln_bias() { return map(tail_index(1)); }
  ConstMatrixMap final_ln_bias() const { return map(tail_index(1)); }
  MatrixMap classifier_weight() { return map(tail_index(2)); }
  ConstMatrixMap classifier_weight() const { return map(tail_index(2)); }
  MatrixMap classifier_bias() { return map(tail_index(3)); }
  ConstMatrixMap classifier_bias() const { return map(tail_index(3)); }

 private:
  std::size_t layer_index(int l, LayerTensor t) const {
    return 2 + static_cast<std::size_t>(l) * static_cast<std::size_t>(LayerTensor::kCount) +
           static_cast<std::size_t>(t);
  }
  std::size_t tail_index(int k) const {
    return 2 + static_cast<std::size_t>(config_.num_layers) *
                   static_cast<std::size_t>(LayerTensor::kCount) +
           static_cast<std::size_t>(k);
  }
  MatrixMap map(std::size_t index);
  ConstMatrixMap map(std::size_t index) const;

  EncoderConfig config_;
  std::vector<TensorInfo> tensors_;
  // Aligned so vectorised kernels see the same layout in every instance;
  // with plain std::allocator the reduction order could differ between runs.
  std::vector<double, Eigen::aligned_allocator<double>> values_;
};

std::string_view to_string(LayerTensor t);

}  // namespace sparselab::nn
