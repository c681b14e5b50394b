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

#include "sparselab/maskgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

#include "sparselab/error.hpp"

namespace sparselab {

namespace {

// Enables the diagonal of every empty row.
AttnMask finalize(std::size_t n, std::vector<std::uint8_t> cells, Pattern pattern) {
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = cells.begin() + static_cast<std::ptrdiff_t>(i * n);
    if (std::none_of(row, row + static_cast<std::ptrdiff_t>(n),
                     [](std::uint8_t c) { return c != 0; })) {
      cells[i * n + i] = 1;
      pattern.floor_applied = true;
    }
  }
  return AttnMask(n, std::move(cells), pattern);
}

// Draws `count` distinct elements of `pool` with a partial Fisher-Yates
// shuffle; the draw is left in pool[0, count).
template <typename T>
void sample_prefix(std::vector<T>& pool, std::size_t count, std::mt19937_64& rng) {
  for (std::size_t k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
    std::swap(pool[k], pool[pick(rng)]);
  }
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0 || nb == 0) return std::nan("");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Non-negative integers; seeds use the full 64-bit range.
std::vector<std::uint64_t> parse_args(std::string_view args) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= args.size()) {
    auto comma = args.find(',', start);
    if (comma == std::string_view::npos) comma = args.size();
    std::uint64_t v = 0;
    const auto* first = args.data() + start;
    const auto* last = args.data() + comma;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw StructuralError("bad pattern argument '" + std::string(args) + "'");
    }
    out.push_back(v);
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::kDense: return "DENSE";
    case PatternKind::kSyntax: return "SYNTAX";
    case PatternKind::kSimilarity: return "SIMILARITY";
    case PatternKind::kNeighbour: return "NEIGHBOUR";
    case PatternKind::kRandom: return "RANDOM";
    case PatternKind::kBigBird: return "BIGBIRD";
  }
  return "?";
}

std::optional<PatternKind> parse_pattern_kind(std::string_view name) {
  for (auto kind : {PatternKind::kDense, PatternKind::kSyntax, PatternKind::kSimilarity,
                    PatternKind::kNeighbour, PatternKind::kRandom, PatternKind::kBigBird}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

std::string Pattern::label() const {
  std::string out(to_string(kind));
  switch (kind) {
    case PatternKind::kNeighbour:
      out += "(" + std::to_string(window) + ")";
      break;
    case PatternKind::kRandom:
      out += "(" + std::to_string(seed) + ")";
      break;
    case PatternKind::kBigBird:
      out += "(" + std::to_string(global) + "," + std::to_string(window) + "," +
             std::to_string(random) + "," + std::to_string(seed) + ")";
      break;
    default:
      break;
  }
  return out;
}

Pattern parse_pattern_label(std::string_view label) {
  const auto open = label.find('(');
  const auto name = label.substr(0, open);
  const auto kind = parse_pattern_kind(name);
  if (!kind) throw StructuralError("unknown pattern '" + std::string(label) + "'");
  Pattern p{.kind = *kind};
  std::vector<std::uint64_t> args;
  if (open != std::string_view::npos) {
    if (label.back() != ')') throw StructuralError("bad pattern '" + std::string(label) + "'");
    args = parse_args(label.substr(open + 1, label.size() - open - 2));
  }
  auto expect = [&](std::size_t count) {
    if (args.size() != count) {
      throw StructuralError("pattern '" + std::string(label) + "' expects " +
                            std::to_string(count) + " arguments");
    }
  };
  auto small = [&](std::size_t k) {
    if (args[k] > 1'000'000) {
      throw StructuralError("pattern '" + std::string(label) + "' argument out of range");
    }
    return static_cast<int>(args[k]);
  };
  switch (p.kind) {
    case PatternKind::kNeighbour:
      expect(1);
      p.window = small(0);
      break;
    case PatternKind::kRandom:
      expect(1);
      p.seed = args[0];
      break;
    case PatternKind::kBigBird:
      expect(4);
      p.global = small(0);
      p.window = small(1);
      p.random = small(2);
      p.seed = args[3];
      break;
    default:
      expect(0);
      break;
  }
  return p;
}

AttnMask::AttnMask(std::size_t n, std::vector<std::uint8_t> cells, Pattern pattern)
    : n_(n), cells_(std::move(cells)), pattern_(pattern) {
  if (n_ == 0) throw StructuralError("mask must have n >= 1");
  if (cells_.size() != n_ * n_) throw StructuralError("mask cell count != n*n");
  for (auto& c : cells_) c = c != 0 ? 1 : 0;
  nnz_ = static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
  sparsity_ = static_cast<double>(n_ * n_ - nnz_) / static_cast<double>(n_ * n_);
}

AttnMask AttnMask::dense(std::size_t n) {
  return AttnMask(n, std::vector<std::uint8_t>(n * n, 1), Pattern{});
}

bool AttnMask::is_symmetric() const {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (allowed(i, j) != allowed(j, i)) return false;
    }
  }
  return true;
}

std::size_t AttnMask::row_nnz(std::size_t i) const {
  const auto r = row(i);
  return static_cast<std::size_t>(std::count(r.begin(), r.end(), 1));
}

std::vector<std::pair<std::size_t, std::size_t>> AttnMask::allowed_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(nnz_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (allowed(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

double sparsity(const AttnMask& mask) { return mask.sparsity(); }

std::size_t target_nnz(std::size_t n, PatternKind kind) {
  if (n <= 1) return n;
  return kind == PatternKind::kSimilarity ? 2 * n : 2 * n - 1;
}

AttnMask syntax_mask(std::span<const std::size_t> heads) {
  const std::size_t n = heads.size();
  if (n == 0) throw StructuralError("syntax mask needs at least one token");
  validate_forest(heads);
  std::vector<std::uint8_t> cells(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cells[i * n + heads[i]] = 1;
    cells[heads[i] * n + i] = 1;
  }
  return finalize(n, std::move(cells), Pattern{.kind = PatternKind::kSyntax});
}

AttnMask syntax_mask(const ParseTree& tree) { return syntax_mask(tree.heads); }

AttnMask similarity_mask(std::span<const std::vector<double>> vectors,
                         std::size_t budget) {
  const std::size_t n = vectors.size();
  if (n == 0) throw StructuralError("similarity mask needs at least one token");
  struct Scored {
    double score;
    std::size_t i, j;
  };
  std::vector<Scored> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    if (vectors[i].size() != vectors[0].size()) {
      throw StructuralError("similarity vectors differ in dimension");
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = cosine(vectors[i], vectors[j]);
      if (!std::isnan(c)) pairs.push_back({c, i, j});
    }
  }
  const bool all_zero = std::all_of(vectors.begin(), vectors.end(), [](const auto& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  });
  if (all_zero) {
    AttnMask fallback = neighbour_mask(n, 1);
    Pattern p = fallback.pattern();
    p.kind = PatternKind::kSimilarity;
    p.window = 0;
    p.similarity_fallback = true;
    return AttnMask(n, {fallback.cells().begin(), fallback.cells().end()}, p);
  }
  // Pairs are generated in lexicographic order, so a stable sort on score
  // keeps that order among ties.
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Scored& a, const Scored& b) { return a.score > b.score; });
  std::vector<std::uint8_t> cells(n * n, 0);
  std::size_t nnz = 0;
  for (const auto& p : pairs) {
    if (nnz >= budget) break;
    cells[p.i * n + p.j] = 1;
    cells[p.j * n + p.i] = 1;
    nnz += 2;
  }
  return finalize(n, std::move(cells), Pattern{.kind = PatternKind::kSimilarity});
}

std::vector<std::vector<double>> piece_vectors(std::span<const std::string> words,
                                               const Alignment& alignment,
                                               const EmbeddingTable& table) {
  if (words.size() != alignment.num_words()) {
    throw StructuralError("word count does not match alignment");
  }
  std::vector<std::vector<double>> out;
  out.reserve(alignment.num_pieces());
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto vec = table.lookup(words[w]);
    for (std::size_t k = 0; k < alignment.spans[w].size(); ++k) {
      out.emplace_back(vec.begin(), vec.end());
    }
  }
  return out;
}

AttnMask neighbour_mask(std::size_t n, int w) {
  if (n == 0) throw StructuralError("neighbour mask needs at least one token");
  if (w < 1) throw StructuralError("neighbour window must be >= 1");
  const auto radius = static_cast<std::size_t>(w);
  std::vector<std::uint8_t> cells(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t d = i > j ? i - j : j - i;
      if (d > 0 && d <= radius) cells[i * n + j] = 1;
    }
  }
  return finalize(n, std::move(cells),
                  Pattern{.kind = PatternKind::kNeighbour, .window = w});
}

AttnMask random_mask(std::size_t n, std::size_t nnz, std::uint64_t seed) {
  if (n == 0) throw StructuralError("random mask needs at least one token");
  if (nnz > n * n - n) {
    throw StructuralError("random mask budget " + std::to_string(nnz) +
                          " exceeds n^2 - n = " + std::to_string(n * n - n));
  }
  std::mt19937_64 rng(seed);
  const std::size_t per_row = (nnz + n - 1) / n;
  std::vector<std::uint8_t> cells(n * n, 0);
  std::vector<std::vector<std::size_t>> targets(n);
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    pool.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) pool.push_back(j);
    }
    sample_prefix(pool, per_row, rng);
    targets[i].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(per_row));
  }
  const std::size_t excess = per_row * n - nnz;
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  sample_prefix(rows, excess, rng);
  for (std::size_t k = 0; k < excess; ++k) {
    auto& t = targets[rows[k]];
    std::uniform_int_distribution<std::size_t> pick(0, t.size() - 1);
    t.erase(t.begin() + static_cast<std::ptrdiff_t>(pick(rng)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : targets[i]) cells[i * n + j] = 1;
  }
  return finalize(n, std::move(cells),
                  Pattern{.kind = PatternKind::kRandom, .seed = seed});
}

AttnMask matched_random_mask(std::size_t n, std::uint64_t seed) {
  return random_mask(n, std::min(target_nnz(n, PatternKind::kRandom), n * n - n), seed);
}

bool in_window(std::size_t i, std::size_t j, int w) {
  if (w <= 0) return false;
  const auto d = static_cast<long>(j) - static_cast<long>(i);
  return d >= -static_cast<long>((w - 1) / 2) && d <= static_cast<long>(w / 2);
}

AttnMask bigbird_mask(std::size_t n, int g, int w, int r, std::uint64_t seed) {
  if (n == 0) throw StructuralError("bigbird mask needs at least one token");
  if (g < 0 || w < 0 || r < 0) throw StructuralError("bigbird parameters must be >= 0");
  if (static_cast<std::size_t>(g) > n) throw StructuralError("bigbird g > n");
  if (static_cast<std::size_t>(w) > 2 * n - 1) throw StructuralError("bigbird w > 2n-1");
  const auto globals = static_cast<std::size_t>(g);
  std::vector<std::uint8_t> cells(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i < globals || j < globals || in_window(i, j, w)) cells[i * n + j] = 1;
    }
  }
  if (r > 0) {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < n; ++i) {
      pool.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (cells[i * n + j] == 0) pool.push_back(j);
      }
      const std::size_t take = std::min(static_cast<std::size_t>(r), pool.size());
      sample_prefix(pool, take, rng);
      for (std::size_t k = 0; k < take; ++k) cells[i * n + pool[k]] = 1;
    }
  }
  return finalize(n, std::move(cells),
                  Pattern{.kind = PatternKind::kBigBird, .window = w, .global = g,
                          .random = r, .seed = seed});
}

std::string_view to_string(PlanDirection direction) {
  switch (direction) {
    case PlanDirection::kTopDown: return "TOP_DOWN";
    case PlanDirection::kBottomUp: return "BOTTOM_UP";
    case PlanDirection::kAllButLast: return "ALL_BUT_LAST";
  }
  return "?";
}

std::optional<PlanDirection> parse_plan_direction(std::string_view name) {
  for (auto d : {PlanDirection::kTopDown, PlanDirection::kBottomUp,
                 PlanDirection::kAllButLast}) {
    if (name == to_string(d)) return d;
  }
  return std::nullopt;
}

std::vector<bool> sparsified_layers(PlanDirection direction, int pivot, int num_layers) {
  if (num_layers < 1) throw StructuralError("plan needs at least one layer");
  if (direction != PlanDirection::kAllButLast && (pivot < 1 || pivot > num_layers)) {
    throw StructuralError("pivot " + std::to_string(pivot) + " outside [1, " +
                          std::to_string(num_layers) + "]");
  }
  std::vector<bool> out(static_cast<std::size_t>(num_layers), false);
  for (int layer = 1; layer <= num_layers; ++layer) {
    bool sparse = false;
    switch (direction) {
      case PlanDirection::kTopDown: sparse = layer >= pivot; break;
      case PlanDirection::kBottomUp: sparse = layer <= pivot; break;
      case PlanDirection::kAllButLast: sparse = layer < num_layers; break;
    }
    out[static_cast<std::size_t>(layer - 1)] = sparse;
  }
  return out;
}

LayerMaskPlan::LayerMaskPlan(std::vector<std::shared_ptr<const AttnMask>> per_layer)
    : per_layer_(std::move(per_layer)) {}

LayerMaskPlan LayerMaskPlan::dense(int num_layers) {
  return LayerMaskPlan(
      std::vector<std::shared_ptr<const AttnMask>>(static_cast<std::size_t>(num_layers)));
}

LayerMaskPlan layer_plan(PlanDirection direction, int pivot, int num_layers,
                         std::shared_ptr<const AttnMask> mask) {
  const auto flags = sparsified_layers(direction, pivot, num_layers);
  std::vector<std::shared_ptr<const AttnMask>> per_layer(flags.size());
  for (std::size_t l = 0; l < flags.size(); ++l) {
    if (flags[l]) per_layer[l] = mask;
  }
  return LayerMaskPlan(std::move(per_layer));
}

}  // namespace sparselab
