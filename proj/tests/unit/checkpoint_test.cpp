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

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "sparselab/error.hpp"

namespace sparselab::nn {
namespace {

EncoderConfig small() {
  EncoderConfig c;
  c.num_layers = 2;
  c.num_heads = 2;
  c.d_model = 8;
  c.d_ff = 12;
  c.vocab_size = 9;
  c.max_len = 10;
  return c;
}

TEST(Checkpoint, StreamRoundTripKeepsFloatValues) {
  const auto params = ModelParams::initialized(small(), 42);
  std::stringstream buf;
  write_checkpoint(buf, params);
  const auto back = read_checkpoint(buf);
  EXPECT_EQ(back.params.config(), params.config());
  ASSERT_EQ(back.params.values().size(), params.values().size());
  // The blob is 32-bit.
  for (std::size_t k = 0; k < params.values().size(); ++k) {
    ASSERT_EQ(back.params.values()[k], static_cast<double>(static_cast<float>(params.values()[k])));
  }
  std::stringstream again;
  write_checkpoint(again, back.params);
  EXPECT_EQ(again.str(), buf.str());
  EXPECT_FALSE(back.degrees.has_value());
}

TEST(Checkpoint, KeepsDegrees) {
  const auto params = ModelParams::initialized(small(), 1);
  DegreeParams deg(2, 2, 0.3, 4.0);
  deg.theta(1, 0) = -2.25;
  const auto path = std::filesystem::temp_directory_path() / "sparselab_checkpoint_test.bin";
  save_checkpoint(path, params, &deg);
  const auto back = load_checkpoint(path);
  std::filesystem::remove(path);
  ASSERT_TRUE(back.degrees.has_value());
  EXPECT_EQ(back.degrees->thetas(), deg.thetas());
  EXPECT_DOUBLE_EQ(back.degrees->temperature(), 4.0);
}

TEST(Checkpoint, RejectsTruncatedOrForeignData) {
  const auto params = ModelParams::initialized(small(), 2);
  std::stringstream buf;
  write_checkpoint(buf, params);
  std::string bytes = buf.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 9));
  EXPECT_ANY_THROW(read_checkpoint(truncated));
  std::stringstream junk("not a checkpoint at all");
  EXPECT_ANY_THROW(read_checkpoint(junk));
}

}  // namespace
}  // namespace sparselab::nn
