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

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "sparselab/nn/degrees.hpp"
#include "sparselab/nn/params.hpp"

namespace sparselab::nn {

// Layout:
//   uint64 LE  header length in bytes
//   header     UTF-8 JSON {"format": "sparselab-checkpoint", "version": 1,
//              "config": {...}, "degrees": {"temperature", "theta"} | null,
//              "tensors": [{"name", "shape"}], "param_count"}
//   blob       param_count little-endian float32 values, tensors in the
//              canonical ModelParams order, each row-major.
struct Checkpoint {
  ModelParams params;
  std::optional<DegreeParams> degrees;
};

void write_checkpoint(std::ostream& out, const ModelParams& params,
                      const DegreeParams* degrees = nullptr);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const DegreeParams* degrees = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sparselab::nn
