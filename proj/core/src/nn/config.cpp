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

#include "sparselab/nn/config.hpp"

#include <string>

#include "sparselab/error.hpp"

namespace sparselab::nn {

std::string_view to_string(InitScheme scheme) {
  return scheme == InitScheme::kGlorot ? "glorot" : "uniform";
}

std::optional<InitScheme> parse_init_scheme(std::string_view name) {
  if (name == "glorot") return InitScheme::kGlorot;
  if (name == "uniform") return InitScheme::kUniform;
  return std::nullopt;
}

void EncoderConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw StructuralError(std::string(name) + " must be positive");
  };
  positive(num_layers, "num_layers");
  positive(num_heads, "num_heads");
  positive(d_model, "d_model");
  positive(d_ff, "d_ff");
  positive(vocab_size, "vocab_size");
  positive(num_classes, "num_classes");
  positive(max_len, "max_len");
  if (d_model % num_heads != 0) {
    throw StructuralError("d_model must be divisible by num_heads");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw StructuralError("dropout must be in [0, 1)");
  }
}

EncoderConfig EncoderConfig::desk() { return EncoderConfig{}; }

EncoderConfig EncoderConfig::large() {
  return EncoderConfig{.num_layers = 12, .num_heads = 12, .d_model = 768, .d_ff = 3072,
                       .vocab_size = 30522, .num_classes = 2, .max_len = 512,
                       .dropout = 0.1, .init = InitScheme::kUniform};
}

void to_json(nlohmann::json& j, const EncoderConfig& c) {
  j = nlohmann::json{{"num_layers", c.num_layers}, {"num_heads", c.num_heads},
                     {"d_model", c.d_model},       {"d_ff", c.d_ff},
                     {"vocab_size", c.vocab_size}, {"num_classes", c.num_classes},
                     {"max_len", c.max_len},       {"dropout", c.dropout},
                     {"init", std::string(to_string(c.init))}};
}

void from_json(const nlohmann::json& j, EncoderConfig& c) {
  j.at("num_layers").get_to(c.num_layers);
  j.at("num_heads").get_to(c.num_heads);
  j.at("d_model").get_to(c.d_model);
  j.at("d_ff").get_to(c.d_ff);
  j.at("vocab_size").get_to(c.vocab_size);
  j.at("num_classes").get_to(c.num_classes);
  j.at("max_len").get_to(c.max_len);
  j.at("dropout").get_to(c.dropout);
  // Older headers carry no scheme.
  c.init = InitScheme::kGlorot;
  if (j.contains("init")) {
    const auto scheme = parse_init_scheme(j.at("init").get<std::string>());
    if (!scheme) throw StructuralError("unknown init scheme");
    c.init = *scheme;
  }
}

}  // namespace sparselab::nn
