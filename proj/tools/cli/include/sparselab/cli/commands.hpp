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
#include <string>
#include <string_view>
#include <vector>

#include "sparselab/cli/config.hpp"
#include "sparselab/train/dataset.hpp"

namespace sparselab::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2 };

// Runs the sparselab command line; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct Splits {
  std::vector<Sentence> train, val;
  std::vector<std::vector<std::size_t>> train_heads, val_heads;  // empty without trees
};

// Sentences (and trees, when given) for both splits.
Splits load_splits(const DataConfig& data);

struct EncodedSplits {
  train::TokenIndex index;
  train::EncodedDataset train, val;
};

// The token index is built from the training split only.
EncodedSplits encode_splits(const DataConfig& data, const Splits& splits);

// Writes through a sibling temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

void cmd_masks(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);
void cmd_stats(const RunConfig& config, const std::vector<std::string>& inputs,
               const std::filesystem::path& out, std::ostream& log);
void cmd_train(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);
void cmd_sweep(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);
void cmd_report(const RunConfig& config, const std::vector<std::string>& inputs,
                const std::filesystem::path& out, std::ostream& log);

}  // namespace sparselab::cli
