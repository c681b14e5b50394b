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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace sparselab {

// One classification instance. For two-sentence tasks `words` holds the
// concatenation and `pair_boundary` is the index of the first word of the
// second sentence.
struct Sentence {
  std::vector<std::string> words;
  int label = 0;
  std::optional<std::size_t> pair_boundary;
};

// Dependency tree as a head array. The root points to itself.
struct ParseTree {
  std::vector<std::size_t> heads;
  std::size_t root = 0;

  std::size_t size() const { return heads.size(); }

  // Validates and builds a tree. Throws StructuralError when the heads do not
  // form a single-rooted tree.
  static ParseTree from_heads(std::vector<std::size_t> heads);
};

// Checks that `heads` is a forest in which every component has exactly one
// self-loop (its root) and no cycles. Returns the roots in index order.
std::vector<std::size_t> validate_forest(std::span<const std::size_t> heads);

// Joins the trees of a sentence pair: the second tree's indices are offset by
// the size of the first, and both roots keep their self-loops. No edge is
// added between the two sentences.
std::vector<std::size_t> combine_trees(const ParseTree& first,
                                       const ParseTree& second);

class SubwordVocab {
 public:
  static constexpr std::string_view kContinuation = "##";
  static constexpr std::string_view kUnknown = "[UNK]";

  SubwordVocab() = default;
  explicit SubwordVocab(std::unordered_set<std::string> entries)
      : entries_(std::move(entries)) {}

  // One piece per line; blank lines ignored.
  static SubwordVocab load(const std::filesystem::path& path);

  // Whole words of the corpus plus every single character both as a
  // word-initial piece and as a continuation piece.
  static SubwordVocab covering(std::span<const std::vector<std::string>> corpus);

  bool contains(std::string_view piece) const {
    return entries_.contains(std::string(piece));
  }
  void insert(std::string piece) { entries_.insert(std::move(piece)); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;
};

// Half-open range of piece indices produced by one word.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

struct Alignment {
  std::vector<Span> spans;

  std::size_t num_words() const { return spans.size(); }
  std::size_t num_pieces() const { return spans.empty() ? 0 : spans.back().end; }
  // Index of the word that produced `piece`.
  std::size_t word_of(std::size_t piece) const;
};

struct Tokenized {
  std::vector<std::string> pieces;
  Alignment alignment;
};

// Greedy longest-match subword split with "##" continuation pieces. A
// character with no covering piece becomes one "[UNK]" piece.
Tokenized tokenize(std::span<const std::string> words, const SubwordVocab& vocab);

// Inverse of tokenize for pieces without unknowns: strips continuation markers
// and concatenates within each span.
std::vector<std::string> detokenize(const Tokenized& tokenized);

// Maps a word-level head array onto pieces: the first piece of word w points at
// the first piece of heads[w], every further piece of w shares that parent.
// Roots keep their self-loop on their first piece.
std::vector<std::size_t> align_heads(std::span<const std::size_t> heads,
                                     const Alignment& alignment);
ParseTree align_tree(const ParseTree& tree, const Alignment& alignment);

struct ConlluSentence {
  std::vector<std::string> words;
  ParseTree tree;
};

// Reads FORM and HEAD columns of a CoNLL-U stream. Multiword-token ranges and
// empty nodes are skipped. Throws ParseError carrying the 0-based sentence
// index for malformed blocks or non-tree HEAD columns.
std::vector<ConlluSentence> read_conllu(std::istream& in);
std::vector<ConlluSentence> load_conllu(const std::filesystem::path& path);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim), fallback_(dim, 0.0) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& word) const { return vectors_.contains(word); }

  // Throws StructuralError when the length differs from dim().
  void add(std::string word, std::vector<double> vec);

  // Unknown words map to the zero vector.
  std::span<const double> lookup(const std::string& word) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::vector<double> fallback_;
};

// "word v1 ... vd" per line. Ragged rows raise ParseError with the line number.
EmbeddingTable read_embeddings(std::istream& in);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

// "text[<TAB>text2]<TAB>label" per line; texts are whitespace-split. When
// `num_classes` is set, labels outside [0, num_classes) are rejected.
std::vector<Sentence> read_tsv(std::istream& in,
                               std::optional<int> num_classes = std::nullopt);
std::vector<Sentence> load_tsv(const std::filesystem::path& path,
                               std::optional<int> num_classes = std::nullopt);

enum class SynthKind {
  kAdjacentDuplicate,  // label 1 iff two adjacent tokens are equal
  kFirstMatch,         // label 1 iff the first token occurs again later
};

std::string_view to_string(SynthKind kind);
std::optional<SynthKind> parse_synth_kind(std::string_view name);

int synth_label(SynthKind kind, std::span<const std::string> words);

// Generates an exactly balanced binary dataset (labels alternate before a
// seeded shuffle). Sequences are drawn uniformly and rejected until their
// label matches the slot, so each class is the uniform distribution over its
// sequences.
std::vector<Sentence> synth_task(SynthKind kind, std::size_t num_examples,
                                 std::size_t seq_len,
                                 std::span<const std::string> alphabet,
                                 std::uint64_t seed);

// "a", "b", ... for sizes up to 26, then "t26", "t27", ...
std::vector<std::string> default_alphabet(std::size_t size);

}  // namespace sparselab
