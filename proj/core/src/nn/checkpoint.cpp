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

#include "sparselab/nn/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "sparselab/error.hpp"

namespace sparselab::nn {

namespace {

constexpr const char* kFormat = "sparselab-checkpoint";

template <typename T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, const ModelParams& params,
                      const DegreeParams* degrees) {
  nlohmann::json header;
  header["format"] = kFormat;
  header["version"] = 1;
  header["config"] = params.config();
  header["degrees"] = degrees != nullptr ? nlohmann::json(*degrees) : nlohmann::json(nullptr);
  auto& tensors = header["tensors"] = nlohmann::json::array();
  for (const auto& t : params.tensors()) {
    tensors.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}});
  }
  header["param_count"] = params.values().size();
  const std::string text = header.dump();
  const auto len = to_little_endian(static_cast<std::uint64_t>(text.size()));
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : params.values()) {
    const auto f = to_little_endian(static_cast<float>(v));
    out.write(reinterpret_cast<const char*>(&f), sizeof f);
  }
  if (!out) throw std::runtime_error("checkpoint write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::uint64_t len = 0;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof len)) {
    throw StructuralError("checkpoint truncated before header");
  }
  len = to_little_endian(len);
  if (len > (std::uint64_t{1} << 30)) throw StructuralError("checkpoint header too large");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw StructuralError("checkpoint truncated inside header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("bad checkpoint header: ") + e.what());
  }
  if (header.value("format", "") != kFormat) throw StructuralError("not a sparselab checkpoint");
  Checkpoint ck{ModelParams(header.at("config").get<EncoderConfig>()), std::nullopt};
  if (!header.at("degrees").is_null()) ck.degrees = degrees_from_json(header.at("degrees"));
  if (header.at("param_count").get<std::size_t>() != ck.params.values().size()) {
    throw StructuralError("checkpoint parameter count does not match its config");
  }
  for (double& v : ck.params.values()) {
    float f = 0;
    if (!in.read(reinterpret_cast<char*>(&f), sizeof f)) {
      throw StructuralError("checkpoint truncated inside parameter blob");
    }
    v = static_cast<double>(to_little_endian(f));
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const DegreeParams* degrees) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_checkpoint(out, params, degrees);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace sparselab::nn
