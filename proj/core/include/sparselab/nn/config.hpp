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

#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

namespace sparselab::nn {

// Weight-matrix initialisation. Biases start at 0 and layer-norm gains at 1
// either way; embeddings and the classifier always use uniform(-0.05, 0.05).
enum class InitScheme {
  kGlorot,   // uniform(-sqrt(6/(fan_in+fan_out)), +sqrt(...)) for layer weights
  kUniform,  // uniform(-0.05, 0.05) for layer weights
};

std::string_view to_string(InitScheme scheme);
std::optional<InitScheme> parse_init_scheme(std::string_view name);

struct EncoderConfig {
  int num_layers = 4;
  int num_heads = 4;
  int d_model = 64;
  int d_ff = 128;
  int vocab_size = 0;
  int num_classes = 2;
  int max_len = 48;
  double dropout = 0.0;
  InitScheme init = InitScheme::kGlorot;

  int head_dim() const { return d_model / num_heads; }

  // Throws StructuralError on non-positive sizes or d_model % num_heads != 0.
  void validate() const;

  // Small model used for the synthetic experiments.
  static EncoderConfig desk();
  // BERT-Base sized (12 layers, 12 heads, width 768).
  static EncoderConfig large();

  bool operator==(const EncoderConfig&) const = default;
};

void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);

}  // namespace sparselab::nn
