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

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparselab/maskgen.hpp"

namespace sparselab {

// {"n": n, "pattern": label, "seed": s (seeded patterns only),
//  "allowed": [[i, j], ...]} with pairs sorted lexicographically.
nlohmann::json mask_to_json(const AttnMask& mask);
AttnMask mask_from_json(const nlohmann::json& doc);

// Little-endian uint32 n, then the row-major cell bitset; cell k is bit
// (k % 8) of byte k / 8. Padding bits are zero.
std::vector<std::uint8_t> mask_to_binary(const AttnMask& mask);
// The binary form carries no pattern; `pattern` is attached as given.
AttnMask mask_from_binary(const std::vector<std::uint8_t>& bytes, Pattern pattern = {});

void save_mask_json(const AttnMask& mask, const std::filesystem::path& path);
AttnMask load_mask_json(const std::filesystem::path& path);

}  // namespace sparselab
