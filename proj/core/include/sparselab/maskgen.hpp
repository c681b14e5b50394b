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
#include <string_view>
#include <vector>

#include "sparselab/corpus.hpp"

namespace sparselab {

enum class PatternKind {
  kDense,
  kSyntax,
  kSimilarity,
  kNeighbour,  // radius-w chain, diagonal excluded
  kRandom,
  kBigBird,    // global rows/cols + width-w band (diagonal included) + random
};

std::string_view to_string(PatternKind kind);
std::optional<PatternKind> parse_pattern_kind(std::string_view name);

// Provenance of a mask. Fields that do not apply to `kind` stay zero.
struct Pattern {
  PatternKind kind = PatternKind::kDense;
  int window = 0;
  int global = 0;
  int random = 0;
  std::uint64_t seed = 0;
  // Set when at least one empty row received its diagonal cell.
  bool floor_applied = false;
  // Set when a similarity mask had no usable vectors and fell back to
  // NEIGHBOUR(1).
  bool similarity_fallback = false;

  bool has_seed() const {
    return kind == PatternKind::kRandom || kind == PatternKind::kBigBird;
  }
  // e.g. "NEIGHBOUR(1)", "RANDOM(7)", "BIGBIRD(2,3,3,7)".
  std::string label() const;
  bool operator==(const Pattern&) const = default;
};

// Parses the labels produced by Pattern::label (flags are not encoded).
Pattern parse_pattern_label(std::string_view label);

// Binary n x n attention pattern; true means attention is permitted. Immutable
// once built; the sparsity is cached at construction.
class AttnMask {
 public:
  // `cells` is row-major with n*n entries.
  AttnMask(std::size_t n, std::vector<std::uint8_t> cells, Pattern pattern);

  static AttnMask dense(std::size_t n);

  std::size_t n() const { return n_; }
  bool allowed(std::size_t i, std::size_t j) const { return cells_[i * n_ + j] != 0; }
  std::span<const std::uint8_t> cells() const { return cells_; }
  std::span<const std::uint8_t> row(std::size_t i) const {
    return std::span<const std::uint8_t>(cells_).subspan(i * n_, n_);
  }
  const Pattern& pattern() const { return pattern_; }

  std::size_t nnz() const { return nnz_; }
  // Fraction of disallowed cells, (n^2 - nnz) / n^2.
  double sparsity() const { return sparsity_; }
  bool is_dense() const { return nnz_ == n_ * n_; }
  bool is_symmetric() const;
  std::size_t row_nnz(std::size_t i) const;
  // Allowed (i, j) pairs in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> allowed_pairs() const;

  bool operator==(const AttnMask& other) const {
    return n_ == other.n_ && cells_ == other.cells_ && pattern_ == other.pattern_;
  }

 private:
  std::size_t n_;
  std::vector<std::uint8_t> cells_;
  Pattern pattern_;
  std::size_t nnz_ = 0;
  double sparsity_ = 0.0;
};

double sparsity(const AttnMask& mask);

// Non-zero budget that the non-syntax patterns match against a syntax mask of
// n tokens: 2n-1 for SYNTAX and RANDOM, 2n for SIMILARITY (one extra cell to
// keep the pair set symmetric). n = 1 gives 1.
std::size_t target_nnz(std::size_t n, PatternKind kind);

// allowed(i, j) iff heads[i] == j or heads[j] == i. Accepts forests (sentence
// pairs keep one self-loop per root). Throws StructuralError for n = 0.
AttnMask syntax_mask(std::span<const std::size_t> heads);
AttnMask syntax_mask(const ParseTree& tree);

// Ranks unordered pairs by cosine similarity (ties lexicographic) and adds both
// directions of each pair until the non-zero count reaches `budget`. Pairs
// involving a zero vector are never selected. If every vector is zero the
// result is NEIGHBOUR(1) with similarity_fallback set.
AttnMask similarity_mask(std::span<const std::vector<double>> vectors,
                         std::size_t budget);

// One vector per piece, copied from the word that produced it.
std::vector<std::vector<double>> piece_vectors(std::span<const std::string> words,
                                               const Alignment& alignment,
                                               const EmbeddingTable& table);

// allowed(i, j) iff 0 < |i - j| <= w. Neighbour(n, 1) has 2(n-1) non-zeros.
AttnMask neighbour_mask(std::size_t n, int w);

// Every row gets ceil(nnz/n) distinct uniform targets j != i, then one target
// is dropped from (ceil(nnz/n) * n - nnz) distinct uniformly chosen rows.
// Not symmetrised. Throws StructuralError when nnz > n^2 - n.
AttnMask random_mask(std::size_t n, std::size_t nnz, std::uint64_t seed);

// RANDOM at the syntax budget min(2n-1, n^2-n).
AttnMask matched_random_mask(std::size_t n, std::uint64_t seed);

// Union of: rows and columns 0..g-1 (the first g positions are global); a band
// of w cells per row including the diagonal (offsets -(w-1)/2 .. w/2, so even
// widths reach one further forward); and r distinct random targets per row
// outside the first two parts when available.
AttnMask bigbird_mask(std::size_t n, int g, int w, int r, std::uint64_t seed);

// Width-w band used by BIGBIRD. Exposed for tests and statistics.
bool in_window(std::size_t i, std::size_t j, int w);

enum class PlanDirection { kTopDown, kBottomUp, kAllButLast };

std::string_view to_string(PlanDirection direction);
std::optional<PlanDirection> parse_plan_direction(std::string_view name);

// Per-layer sparsified flags (index 0 is layer 1). TOP_DOWN sparsifies layers
// pivot..L, BOTTOM_UP layers 1..pivot, ALL_BUT_LAST layers 1..L-1 (pivot
// ignored). Throws StructuralError for pivot outside [1, L].
std::vector<bool> sparsified_layers(PlanDirection direction, int pivot, int num_layers);

// Per-layer attention masks; a null entry means dense attention.
class LayerMaskPlan {
 public:
  LayerMaskPlan() = default;
  explicit LayerMaskPlan(std::vector<std::shared_ptr<const AttnMask>> per_layer);

  static LayerMaskPlan dense(int num_layers);

  int num_layers() const { return static_cast<int>(per_layer_.size()); }
  bool is_sparse(int layer) const { return per_layer_.at(layer) != nullptr; }
  // 0-based layer index.
  const AttnMask* mask(int layer) const { return per_layer_.at(layer).get(); }

 private:
  std::vector<std::shared_ptr<const AttnMask>> per_layer_;
};

LayerMaskPlan layer_plan(PlanDirection direction, int pivot, int num_layers,
                         std::shared_ptr<const AttnMask> mask);

}  // namespace sparselab
