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

#include "sparselab/mask_io.hpp"

#include <fstream>

#include "sparselab/error.hpp"

namespace sparselab {

nlohmann::json mask_to_json(const AttnMask& mask) {
  nlohmann::json doc;
  doc["n"] = mask.n();
  doc["pattern"] = mask.pattern().label();
  if (mask.pattern().has_seed()) doc["seed"] = mask.pattern().seed;
  if (mask.pattern().floor_applied) doc["floor_applied"] = true;
  if (mask.pattern().similarity_fallback) doc["similarity_fallback"] = true;
  auto& allowed = doc["allowed"] = nlohmann::json::array();
  for (auto [i, j] : mask.allowed_pairs()) allowed.push_back({i, j});
  return doc;
}

AttnMask mask_from_json(const nlohmann::json& doc) {
  try {
    const auto n = doc.at("n").get<std::size_t>();
    Pattern pattern = parse_pattern_label(doc.at("pattern").get<std::string>());
    if (doc.contains("seed")) pattern.seed = doc.at("seed").get<std::uint64_t>();
    pattern.floor_applied = doc.value("floor_applied", false);
    pattern.similarity_fallback = doc.value("similarity_fallback", false);
    if (n == 0) throw StructuralError("mask JSON has n = 0");
    std::vector<std::uint8_t> cells(n * n, 0);
    for (const auto& pair : doc.at("allowed")) {
      const auto i = pair.at(0).get<std::size_t>();
      const auto j = pair.at(1).get<std::size_t>();
      if (i >= n || j >= n) throw StructuralError("mask JSON pair out of range");
      cells[i * n + j] = 1;
    }
    return AttnMask(n, std::move(cells), pattern);
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("malformed mask JSON: ") + e.what());
  }
}

std::vector<std::uint8_t> mask_to_binary(const AttnMask& mask) {
  const auto n = static_cast<std::uint32_t>(mask.n());
  const std::size_t cells = mask.n() * mask.n();
  std::vector<std::uint8_t> out(4 + (cells + 7) / 8, 0);
  for (int b = 0; b < 4; ++b) out[static_cast<std::size_t>(b)] = (n >> (8 * b)) & 0xFF;
  const auto bits = mask.cells();
  for (std::size_t k = 0; k < cells; ++k) {
    if (bits[k]) out[4 + k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
  }
  return out;
}

AttnMask mask_from_binary(const std::vector<std::uint8_t>& bytes, Pattern pattern) {
  if (bytes.size() < 4) throw StructuralError("binary mask shorter than its header");
  std::uint32_t n = 0;
  for (int b = 0; b < 4; ++b) n |= std::uint32_t{bytes[static_cast<std::size_t>(b)]} << (8 * b);
  const std::size_t cells = std::size_t{n} * n;
  if (bytes.size() != 4 + (cells + 7) / 8) {
    throw StructuralError("binary mask size does not match n = " + std::to_string(n));
  }
  std::vector<std::uint8_t> out(cells);
  for (std::size_t k = 0; k < cells; ++k) out[k] = (bytes[4 + k / 8] >> (k % 8)) & 1u;
  return AttnMask(n, std::move(out), pattern);
}

void save_mask_json(const AttnMask& mask, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << mask_to_json(mask).dump() << '\n';
}

AttnMask load_mask_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(path.string() + ": " + e.what());
  }
  return mask_from_json(doc);
}

}  // namespace sparselab
