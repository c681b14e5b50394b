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

#include "sparselab/train/dataset.hpp"

#include <algorithm>

#include "sparselab/error.hpp"

namespace sparselab::train {

namespace {

void check_label(int label, int num_classes) {
  if (label < 0 || label >= num_classes) {
    throw StructuralError("label " + std::to_string(label) + " outside [0, " +
                          std::to_string(num_classes) + ")");
  }
}

// Places a piece-level mask after the classification position.
AttnMask with_cls_position(const AttnMask& inner) {
  const std::size_t n = inner.n() + 1;
  std::vector<std::uint8_t> cells(n * n, 0);
  cells[0] = 1;
  for (std::size_t i = 0; i < inner.n(); ++i) {
    for (std::size_t j = 0; j < inner.n(); ++j) {
      cells[(i + 1) * n + (j + 1)] = inner.allowed(i, j) ? 1 : 0;
    }
  }
  Pattern p = inner.pattern();
  p.floor_applied = true;
  return AttnMask(n, std::move(cells), p);
}

}  // namespace

TokenIndex::TokenIndex() {
  add("[CLS]");
  add(std::string(SubwordVocab::kUnknown));
}

void TokenIndex::add(const std::string& piece) {
  if (ids_.try_emplace(piece, static_cast<int>(pieces_.size())).second) {
    pieces_.push_back(piece);
  }
}

int TokenIndex::id(const std::string& piece) const {
  auto it = ids_.find(piece);
  return it == ids_.end() ? kUnknown : it->second;
}

std::size_t EncodedDataset::max_length() const {
  std::size_t n = 0;
  for (const auto& e : examples) n = std::max(n, e.ids.size());
  return n;
}

EncodedDataset encode_words(std::span<const Sentence> sentences, TokenIndex& index,
                            bool extend_index, int num_classes) {
  EncodedDataset out;
  out.num_classes = num_classes;
  out.examples.reserve(sentences.size());
  for (const auto& s : sentences) {
    check_label(s.label, num_classes);
    EncodedExample e;
    e.label = s.label;
    e.ids.reserve(s.words.size() + 1);
    e.ids.push_back(TokenIndex::kCls);
    for (const auto& w : s.words) {
      if (extend_index) index.add(w);
      e.ids.push_back(index.id(w));
    }
    out.examples.push_back(std::move(e));
  }
  return out;
}

EncodedDataset encode_sentences(std::span<const Sentence> sentences, const SubwordVocab& vocab,
                                TokenIndex& index, bool extend_index, int num_classes,
                                const std::vector<std::vector<std::size_t>>* word_heads,
                                const EmbeddingTable* embeddings) {
  if (word_heads != nullptr && word_heads->size() != sentences.size()) {
    throw StructuralError("one tree per sentence required");
  }
  EncodedDataset out;
  out.num_classes = num_classes;
  out.examples.reserve(sentences.size());
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    const Sentence& s = sentences[k];
    check_label(s.label, num_classes);
    const Tokenized tok = tokenize(s.words, vocab);
    EncodedExample e;
    e.label = s.label;
    e.ids.push_back(TokenIndex::kCls);
    for (const auto& p : tok.pieces) {
      if (extend_index) index.add(p);
      e.ids.push_back(index.id(p));
    }
    if (word_heads != nullptr) e.piece_heads = align_heads((*word_heads)[k], tok.alignment);
    if (embeddings != nullptr) e.piece_vectors = piece_vectors(s.words, tok.alignment, *embeddings);
    out.examples.push_back(std::move(e));
  }
  return out;
}

std::string MaskSpec::label() const {
  Pattern p{.kind = kind, .window = window, .global = global, .random = random, .seed = seed};
  if (kind != PatternKind::kNeighbour && kind != PatternKind::kBigBird) p.window = 0;
  return p.label();
}

std::uint64_t instance_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 finaliser over the combined value.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

AttnMask piece_mask(const MaskSpec& spec, std::size_t n, std::span<const std::size_t> heads,
                    std::span<const std::vector<double>> vectors, std::size_t index) {
  switch (spec.kind) {
    case PatternKind::kDense:
      return AttnMask::dense(n);
    case PatternKind::kNeighbour:
      return neighbour_mask(n, spec.window);
    case PatternKind::kRandom:
      return matched_random_mask(n, instance_seed(spec.seed, index));
    case PatternKind::kBigBird:
      return bigbird_mask(n, spec.global, spec.window, spec.random,
                          instance_seed(spec.seed, index));
    case PatternKind::kSyntax:
      if (heads.size() != n) throw StructuralError("SYNTAX masks need a parse tree for every example");
      return syntax_mask(heads);
    case PatternKind::kSimilarity:
      if (vectors.size() != n) {
        throw StructuralError("SIMILARITY masks need embeddings for every example");
      }
      return similarity_mask(vectors, target_nnz(n, PatternKind::kSimilarity));
  }
  throw StructuralError("unknown pattern kind");
}

AttnMask instance_mask(const MaskSpec& spec, const EncodedExample& example, std::size_t index) {
  const std::size_t n = example.ids.size();
  if (spec.kind == PatternKind::kSyntax || spec.kind == PatternKind::kSimilarity) {
    // Tree and similarity structure live on the pieces; CLS keeps its diagonal.
    return with_cls_position(
        piece_mask(spec, n - 1, example.piece_heads, example.piece_vectors, index));
  }
  return piece_mask(spec, n, {}, {}, index);
}

std::vector<std::shared_ptr<const AttnMask>> instance_masks(const MaskSpec& spec,
                                                            const EncodedDataset& data) {
  std::vector<std::shared_ptr<const AttnMask>> out;
  out.reserve(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    out.push_back(std::make_shared<const AttnMask>(instance_mask(spec, data.examples[k], k)));
  }
  return out;
}

}  // namespace sparselab::train
