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

#include "sparselab/nn/params.hpp"

#include <cmath>
#include <random>

namespace sparselab::nn {

namespace {

bool is_gain(LayerTensor t) {
  return t == LayerTensor::kLn1Gain || t == LayerTensor::kLn2Gain;
}

bool is_bias(LayerTensor t) {
  switch (t) {
    case LayerTensor::kLn1Bias:
    case LayerTensor::kQueryBias:
    case LayerTensor::kKeyBias:
    case LayerTensor::kValueBias:
    case LayerTensor::kOutBias:
    case LayerTensor::kLn2Bias:
    case LayerTensor::kFf1Bias:
    case LayerTensor::kFf2Bias:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string_view to_string(LayerTensor t) {
  switch (t) {
    case LayerTensor::kLn1Gain: return "ln1_gain";
    case LayerTensor::kLn1Bias: return "ln1_bias";
    case LayerTensor::kQueryWeight: return "query_weight";
    case LayerTensor::kQueryBias: return "query_bias";
    case LayerTensor::kKeyWeight: return "key_weight";
    case LayerTensor::kKeyBias: return "key_bias";
    case LayerTensor::kValueWeight: return "value_weight";
    case LayerTensor::kValueBias: return "value_bias";
    case LayerTensor::kOutWeight: return "out_weight";
    case LayerTensor::kOutBias: return "out_bias";
    case LayerTensor::kLn2Gain: return "ln2_gain";
    case LayerTensor::kLn2Bias: return "ln2_bias";
    case LayerTensor::kFf1Weight: return "ff1_weight";
    case LayerTensor::kFf1Bias: return "ff1_bias";
    case LayerTensor::kFf2Weight: return "ff2_weight";
    case LayerTensor::kFf2Bias: return "ff2_bias";
    case LayerTensor::kCount: break;
  }
  return "?";
}

ModelParams::ModelParams(const EncoderConfig& config) : config_(config) {
  config_.validate();
  const Eigen::Index d = config_.d_model;
  const Eigen::Index ff = config_.d_ff;
  std::size_t offset = 0;
  auto add = [&](std::string name, Eigen::Index rows, Eigen::Index cols) {
    tensors_.push_back(TensorInfo{std::move(name), rows, cols, offset});
    offset += static_cast<std::size_t>(rows * cols);
  };
  add("token_embedding", config_.vocab_size, d);
  add("position_embedding", config_.max_len, d);
  for (int l = 0; l < config_.num_layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    for (int k = 0; k < static_cast<int>(LayerTensor::kCount); ++k) {
      const auto t = static_cast<LayerTensor>(k);
      Eigen::Index rows = 1, cols = d;
      switch (t) {
        case LayerTensor::kQueryWeight:
        case LayerTensor::kKeyWeight:
        case LayerTensor::kValueWeight:
        case LayerTensor::kOutWeight:
          rows = d;
          break;
        case LayerTensor::kFf1Weight:
          rows = d;
          cols = ff;
          break;
        case LayerTensor::kFf1Bias:
          cols = ff;
          break;
        case LayerTensor::kFf2Weight:
          rows = ff;
          break;
        default:
          break;
      }
      add(prefix + std::string(to_string(t)), rows, cols);
    }
  }
  add("final_ln_gain", 1, d);
  add("final_ln_bias", 1, d);
  add("classifier_weight", d, config_.num_classes);
  add("classifier_bias", 1, config_.num_classes);
  values_.assign(offset, 0.0);
}

ModelParams ModelParams::initialized(const EncoderConfig& config, std::uint64_t seed) {
  ModelParams p(config);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.05, 0.05);
  auto fill_uniform = [&](MatrixMap m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = uniform(rng);
  };
  fill_uniform(p.token_embedding());
  fill_uniform(p.position_embedding());
  for (int l = 0; l < config.num_layers; ++l) {
    for (int k = 0; k < static_cast<int>(LayerTensor::kCount); ++k) {
      const auto t = static_cast<LayerTensor>(k);
      if (is_gain(t)) {
        p.layer(l, t).setOnes();
      } else if (!is_bias(t) && config.init == InitScheme::kUniform) {
        fill_uniform(p.layer(l, t));
      } else if (!is_bias(t)) {
        auto m = p.layer(l, t);
        const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
        std::uniform_real_distribution<double> glorot(-limit, limit);
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = glorot(rng);
      }
    }
  }
  p.final_ln_gain().setOnes();
  fill_uniform(p.classifier_weight());
  return p;
}

void ModelParams::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

MatrixMap ModelParams::map(std::size_t index) {
  const auto& t = tensors_[index];
  return MatrixMap(values_.data() + t.offset, t.rows, t.cols);
}

ConstMatrixMap ModelParams::map(std::size_t index) const {
  const auto& t = tensors_[index];
  return ConstMatrixMap(values_.data() + t.offset, t.rows, t.cols);
}

}  // namespace sparselab::nn
