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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sparselab/corpus.hpp"
#include "sparselab/maskgen.hpp"

namespace sparselab::train {

// Piece-to-id table for the encoder. Ids 0 and 1 are reserved for the
// classification token and unknown pieces.
class TokenIndex {
 public:
  static constexpr int kCls = 0;
  static constexpr int kUnknown = 1;

  TokenIndex();

  // Assigns ids to unseen pieces in order of first appearance.
  void add(const std::string& piece);
  int id(const std::string& piece) const;
  int size() const { return static_cast<int>(pieces_.size()); }

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> ids_;
};

// Model input for one sentence. ids[0] is the classification token; ids[1..]
// are pieces. Content-based patterns use the piece-level heads and vectors.
struct EncodedExample {
  std::vector<int> ids;
  int label = 0;
  std::vector<std::size_t> piece_heads;
  std::vector<std::vector<double>> piece_vectors;
};

struct EncodedDataset {
  std::vector<EncodedExample> examples;
  int num_classes = 2;

  std::size_t size() const { return examples.size(); }
  std::size_t max_length() const;
};

// Each word is one piece; no trees or vectors.
EncodedDataset encode_words(std::span<const Sentence> sentences, TokenIndex& index,
                            bool extend_index, int num_classes);

// Tokenizes with `vocab`, aligns optional word-level trees (one per sentence;
// pair trees already combined) and attaches per-piece embedding vectors.
EncodedDataset encode_sentences(std::span<const Sentence> sentences, const SubwordVocab& vocab,
                                TokenIndex& index, bool extend_index, int num_classes,
                                const std::vector<std::vector<std::size_t>>* word_heads = nullptr,
                                const EmbeddingTable* embeddings = nullptr);

// What mask each instance gets. Per-instance seeds are derived from `seed`
// and the example index, so masks are fixed for the whole run.
struct MaskSpec {
  PatternKind kind = PatternKind::kDense;
  int window = 1;
  int global = 0;
  int random = 0;
  std::uint64_t seed = 0;

  std::string label() const;
  bool operator==(const MaskSpec&) const = default;
};

std::uint64_t instance_seed(std::uint64_t seed, std::size_t index);

// Mask over the full model input (classification position included). Position
// patterns (NEIGHBOUR, RANDOM, BIGBIRD) span all positions; SYNTAX and
// SIMILARITY are built over the pieces and placed after the classification
// position, which keeps only its diagonal.
// Mask over \`n\` pieces alone, without the classification position. \`heads\`
// and \`vectors\` are only read by SYNTAX and SIMILARITY.
AttnMask piece_mask(const MaskSpec& spec, std::size_t n, std::span<const std::size_t> heads,
                    std::span<const std::vector<double>> vectors, std::size_t index);

AttnMask instance_mask(const MaskSpec& spec, const EncodedExample& example, std::size_t index);

std::vector<std::shared_ptr<const AttnMask>> instance_masks(const MaskSpec& spec,
                                                            const EncodedDataset& data);

}  // namespace sparselab::train
