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

#include "sparselab/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>
#include <sstream>

#include "sparselab/error.hpp"

namespace sparselab {

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

// Splits a UTF-8 string into code points. Invalid lead bytes are taken as
// single-byte characters.
std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if ((lead & 0xE0) == 0xC0) {
      len = 2;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
    }
    len = std::min(len, text.size() - i);
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(text)};
  std::string w;
  while (ss >> w) out.push_back(std::move(w));
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::vector<std::size_t> validate_forest(std::span<const std::size_t> heads) {
  const std::size_t n = heads.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (heads[i] >= n) {
      throw StructuralError("head index " + std::to_string(heads[i]) +
                            " out of range at node " + std::to_string(i));
    }
  }
  // 0 = unvisited, 1 = on current path, 2 = known to reach a root.
  std::vector<std::uint8_t> state(n, 0);
  std::vector<std::size_t> path;
  for (std::size_t start = 0; start < n; ++start) {
    std::size_t v = start;
    path.clear();
    while (state[v] == 0) {
      state[v] = 1;
      path.push_back(v);
      if (heads[v] == v) break;
      v = heads[v];
    }
    if (state[v] == 1 && heads[v] != v) {
      throw StructuralError("cycle through node " + std::to_string(v));
    }
    for (auto u : path) state[u] = 2;
  }
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) {
    if (heads[i] == i) roots.push_back(i);
  }
  return roots;
}

ParseTree ParseTree::from_heads(std::vector<std::size_t> heads) {
  if (heads.empty()) throw StructuralError("empty tree");
  const auto roots = validate_forest(heads);
  if (roots.size() != 1) {
    throw StructuralError("expected exactly one root, found " +
                          std::to_string(roots.size()));
  }
  return ParseTree{std::move(heads), roots.front()};
}

std::vector<std::size_t> combine_trees(const ParseTree& first,
                                       const ParseTree& second) {
  std::vector<std::size_t> heads = first.heads;
  const std::size_t offset = first.size();
  for (auto h : second.heads) heads.push_back(h + offset);
  return heads;
}

SubwordVocab SubwordVocab::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::unordered_set<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (!line.empty()) entries.insert(line);
  }
  return SubwordVocab(std::move(entries));
}

SubwordVocab SubwordVocab::covering(
    std::span<const std::vector<std::string>> corpus) {
  std::unordered_set<std::string> entries;
  for (const auto& words : corpus) {
    for (const auto& w : words) {
      entries.insert(w);
      for (auto& c : utf8_chars(w)) {
        entries.insert(std::string(kContinuation) + c);
        entries.insert(std::move(c));
      }
    }
  }
  return SubwordVocab(std::move(entries));
}

std::size_t Alignment::word_of(std::size_t piece) const {
  auto it = std::upper_bound(
      spans.begin(), spans.end(), piece,
      [](std::size_t p, const Span& s) { return p < s.end; });
  if (it == spans.end()) throw StructuralError("piece index out of range");
  return static_cast<std::size_t>(it - spans.begin());
}

Tokenized tokenize(std::span<const std::string> words,
                   const SubwordVocab& vocab) {
  Tokenized out;
  out.alignment.spans.reserve(words.size());
  for (const auto& word : words) {
    const std::size_t begin = out.pieces.size();
    const auto chars = utf8_chars(word);
    std::size_t start = 0;
    while (start < chars.size()) {
      std::size_t end = chars.size();
      std::string match;
      for (; end > start; --end) {
        std::string candidate = start > 0 ? std::string(SubwordVocab::kContinuation) : "";
        for (std::size_t k = start; k < end; ++k) candidate += chars[k];
        if (vocab.contains(candidate)) {
          match = std::move(candidate);
          break;
        }
      }
      if (match.empty()) {
        out.pieces.emplace_back(SubwordVocab::kUnknown);
        start += 1;
      } else {
        out.pieces.push_back(std::move(match));
        start = end;
      }
    }
    if (chars.empty()) out.pieces.emplace_back(SubwordVocab::kUnknown);
    out.alignment.spans.push_back(Span{begin, out.pieces.size()});
  }
  return out;
}

std::vector<std::string> detokenize(const Tokenized& tokenized) {
  std::vector<std::string> words;
  words.reserve(tokenized.alignment.num_words());
  for (const auto& span : tokenized.alignment.spans) {
    std::string word;
    for (std::size_t k = span.begin; k < span.end; ++k) {
      std::string_view piece = tokenized.pieces[k];
      if (k > span.begin && piece.starts_with(SubwordVocab::kContinuation)) {
        piece.remove_prefix(SubwordVocab::kContinuation.size());
      }
      word += piece;
    }
    words.push_back(std::move(word));
  }
  return words;
}

std::vector<std::size_t> align_heads(std::span<const std::size_t> heads,
                                     const Alignment& alignment) {
  if (heads.size() != alignment.num_words()) {
    throw StructuralError("tree has " + std::to_string(heads.size()) +
                          " words but alignment has " +
                          std::to_string(alignment.num_words()));
  }
  validate_forest(heads);
  std::vector<std::size_t> out(alignment.num_pieces());
  for (std::size_t w = 0; w < heads.size(); ++w) {
    const Span span = alignment.spans[w];
    if (span.size() == 0) throw StructuralError("word with no pieces");
    const std::size_t parent = alignment.spans[heads[w]].begin;
    for (std::size_t k = span.begin; k < span.end; ++k) out[k] = parent;
  }
  return out;
}

ParseTree align_tree(const ParseTree& tree, const Alignment& alignment) {
  return ParseTree::from_heads(align_heads(tree.heads, alignment));
}

std::vector<ConlluSentence> read_conllu(std::istream& in) {
  std::vector<ConlluSentence> out;
  std::vector<std::string> words;
  std::vector<long> raw_heads;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (words.empty()) return;
    const std::size_t index = out.size();
    std::vector<std::size_t> heads(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      const long h = raw_heads[i];
      if (h < 0 || static_cast<std::size_t>(h) > words.size()) {
        throw ParseError("sentence " + std::to_string(index) +
                             ": HEAD out of range at token " + std::to_string(i + 1),
                         index);
      }
      heads[i] = h == 0 ? i : static_cast<std::size_t>(h - 1);
    }
    try {
      out.push_back(ConlluSentence{words, ParseTree::from_heads(std::move(heads))});
    } catch (const StructuralError& e) {
      throw ParseError("sentence " + std::to_string(index) + ": " + e.what(), index);
    }
    words.clear();
    raw_heads.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 7) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 10 columns",
                       out.size());
    }
    const std::string& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) {
      continue;
    }
    std::size_t id_value = 0;
    if (!parse_number(id, id_value) || id_value != words.size() + 1) {
      throw ParseError("line " + std::to_string(line_no) + ": unexpected ID " + id,
                       out.size());
    }
    long head = 0;
    if (!parse_number(cols[6], head)) {
      throw ParseError("line " + std::to_string(line_no) + ": bad HEAD " + cols[6],
                       out.size());
    }
    words.push_back(cols[1]);
    raw_heads.push_back(head);
  }
  flush();
  return out;
}

std::vector<ConlluSentence> load_conllu(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_conllu(in);
}

void EmbeddingTable::add(std::string word, std::vector<double> vec) {
  if (vec.size() != dim_) {
    throw StructuralError("embedding for '" + word + "' has dimension " +
                          std::to_string(vec.size()) + ", expected " +
                          std::to_string(dim_));
  }
  vectors_.insert_or_assign(std::move(word), std::move(vec));
}

std::span<const double> EmbeddingTable::lookup(const std::string& word) const {
  if (auto it = vectors_.find(word); it != vectors_.end()) return it->second;
  return fallback_;
}

EmbeddingTable read_embeddings(std::istream& in) {
  std::optional<EmbeddingTable> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    std::vector<double> vec;
    vec.reserve(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0;
      if (!parse_number(fields[k], v)) {
        throw ParseError("line " + std::to_string(line_no) + ": bad value '" +
                             fields[k] + "'",
                         line_no);
      }
      vec.push_back(v);
    }
    if (!table) {
      if (vec.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ": no values", line_no);
      }
      table.emplace(vec.size());
    }
    if (vec.size() != table->dim()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(table->dim()) + " values, found " +
                           std::to_string(vec.size()),
                       line_no);
    }
    table->add(std::move(fields[0]), std::move(vec));
  }
  return table ? std::move(*table) : EmbeddingTable{};
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_embeddings(in);
}

std::vector<Sentence> read_tsv(std::istream& in, std::optional<int> num_classes) {
  std::vector<Sentence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 2 && cols.size() != 3) {
      throw ParseError("line " + std::to_string(line_no) +
                           ": expected 2 or 3 tab-separated columns",
                       line_no);
    }
    Sentence s;
    if (!parse_number(cols.back(), s.label) || s.label < 0 ||
        (num_classes && s.label >= *num_classes)) {
      throw ParseError("line " + std::to_string(line_no) + ": bad label '" +
                           cols.back() + "'",
                       line_no);
    }
    s.words = split_whitespace(cols[0]);
    if (cols.size() == 3) {
      auto second = split_whitespace(cols[1]);
      if (s.words.empty() || second.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ": empty text", line_no);
      }
      s.pair_boundary = s.words.size();
      s.words.insert(s.words.end(), second.begin(), second.end());
    }
    if (s.words.empty()) {
      throw ParseError("line " + std::to_string(line_no) + ": empty text", line_no);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sentence> load_tsv(const std::filesystem::path& path,
                               std::optional<int> num_classes) {
  auto in = open_or_throw(path);
  return read_tsv(in, num_classes);
}

std::string_view to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::kAdjacentDuplicate:
      return "ADJ_DUP";
    case SynthKind::kFirstMatch:
      return "FIRST_MATCH";
  }
  return "?";
}

std::optional<SynthKind> parse_synth_kind(std::string_view name) {
  if (name == "ADJ_DUP") return SynthKind::kAdjacentDuplicate;
  if (name == "FIRST_MATCH") return SynthKind::kFirstMatch;
  return std::nullopt;
}

int synth_label(SynthKind kind, std::span<const std::string> words) {
  switch (kind) {
    case SynthKind::kAdjacentDuplicate:
      for (std::size_t i = 1; i < words.size(); ++i) {
        if (words[i] == words[i - 1]) return 1;
      }
      return 0;
    case SynthKind::kFirstMatch:
      if (words.empty()) return 0;
      return std::find(words.begin() + 1, words.end(), words.front()) != words.end()
                 ? 1
                 : 0;
  }
  return 0;
}

std::vector<Sentence> synth_task(SynthKind kind, std::size_t num_examples,
                                 std::size_t seq_len,
                                 std::span<const std::string> alphabet,
                                 std::uint64_t seed) {
  if (seq_len < 2) throw StructuralError("synthetic tasks need seq_len >= 2");
  if (alphabet.size() < 2) throw StructuralError("alphabet needs >= 2 symbols");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> symbol(0, alphabet.size() - 1);

  std::vector<int> labels(num_examples);
  for (std::size_t i = 0; i < num_examples; ++i) labels[i] = static_cast<int>(i % 2);
  std::shuffle(labels.begin(), labels.end(), rng);

  constexpr std::size_t kMaxTries = 1'000'000;
  std::vector<Sentence> out;
  out.reserve(num_examples);
  std::vector<std::string> words(seq_len);
  for (int target : labels) {
    std::size_t tries = 0;
    do {
      if (++tries > kMaxTries) {
        throw StructuralError("cannot sample class " + std::to_string(target) +
                              " with this alphabet and length");
      }
      for (auto& w : words) w = alphabet[symbol(rng)];
    } while (synth_label(kind, words) != target);
    out.push_back(Sentence{words, target, std::nullopt});
  }
  return out;
}

std::vector<std::string> default_alphabet(std::size_t size) {
  std::vector<std::string> out;
  out.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    out.push_back(i < 26 ? std::string(1, static_cast<char>('a' + i))
                         : "t" + std::to_string(i));
  }
  return out;
}

}  // namespace sparselab
