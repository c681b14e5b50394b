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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "sparselab/error.hpp"

namespace sparselab {
namespace {

using Cells = std::set<std::pair<std::size_t, std::size_t>>;

Cells cells_of(const AttnMask& m) {
  Cells out;
  for (auto p : m.allowed_pairs()) out.insert(p);
  return out;
}

std::size_t recount_false(const AttnMask& m) {
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < m.n(); ++i) {
    for (std::size_t j = 0; j < m.n(); ++j) zeros += m.allowed(i, j) ? 0 : 1;
  }
  return zeros;
}

std::vector<std::size_t> random_tree(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> parent(n, 0);
  for (std::size_t k = 1; k < n; ++k) parent[k] = rng() % k;
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < n; ++k) perm[k] = k;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> heads(n);
  for (std::size_t k = 0; k < n; ++k) heads[perm[k]] = perm[parent[k]];
  return heads;
}

TEST(SyntaxMask, TwoTokenExample) {
  const auto m = syntax_mask(std::vector<std::size_t>{0, 0});
  EXPECT_EQ(cells_of(m), (Cells{{0, 0}, {0, 1}, {1, 0}}));
  EXPECT_DOUBLE_EQ(m.sparsity(), 0.25);
}

TEST(SyntaxMask, SingleRoot) {
  const auto m = syntax_mask(std::vector<std::size_t>{0});
  EXPECT_EQ(cells_of(m), (Cells{{0, 0}}));
  EXPECT_DOUBLE_EQ(m.sparsity(), 0.0);
}

TEST(SyntaxMask, NineTokensMatchesColaDensity) {
  std::mt19937_64 rng(5);
  const auto m = syntax_mask(random_tree(9, rng));
  EXPECT_EQ(m.nnz(), 17u);
  EXPECT_NEAR(m.sparsity(), 0.790, 5e-4);
}

TEST(SyntaxMask, AlwaysTwoNMinusOneAndSymmetric) {
  std::mt19937_64 rng(17);
  for (std::size_t n = 2; n <= 64; ++n) {
    for (int t = 0; t < 20; ++t) {
      const auto m = syntax_mask(random_tree(n, rng));
      ASSERT_EQ(m.nnz(), 2 * n - 1) << n;
      ASSERT_TRUE(m.is_symmetric());
      ASSERT_EQ(recount_false(m), n * n - m.nnz());
      ASSERT_FALSE(m.pattern().floor_applied);
    }
  }
}

TEST(SyntaxMask, PairForestKeepsBothRoots) {
  const auto m = syntax_mask(std::vector<std::size_t>{0, 0, 2, 2});
  EXPECT_TRUE(m.allowed(0, 0));
  EXPECT_TRUE(m.allowed(2, 2));
  EXPECT_FALSE(m.allowed(1, 2));
  EXPECT_EQ(m.nnz(), 2 * 4 - 2);
}

TEST(TargetNnz, Budgets) {
  EXPECT_EQ(target_nnz(5, PatternKind::kSyntax), 9u);
  EXPECT_EQ(target_nnz(5, PatternKind::kSimilarity), 10u);
  EXPECT_EQ(target_nnz(5, PatternKind::kRandom), 9u);
  EXPECT_EQ(target_nnz(2, PatternKind::kSyntax), 3u);
  for (auto k : {PatternKind::kSyntax, PatternKind::kSimilarity, PatternKind::kRandom}) {
    EXPECT_EQ(target_nnz(1, k), 1u);
  }
}

TEST(SimilarityMask, PicksMostSimilarPair) {
  const std::vector<std::vector<double>> v{{1, 0}, {1, 0}, {0, 1}};
  const auto m = similarity_mask(v, 2);
  EXPECT_EQ(cells_of(m), (Cells{{0, 1}, {1, 0}, {2, 2}}));  // token 2 gets the floor
  EXPECT_TRUE(m.is_symmetric());
}

TEST(SimilarityMask, TiesBreakLexicographically) {
  const std::vector<std::vector<double>> v{{1, 0}, {1, 0}, {1, 0}};
  const auto m = similarity_mask(v, 2);
  EXPECT_EQ(cells_of(m), (Cells{{0, 1}, {1, 0}, {2, 2}}));  // token 2 gets the floor
}

TEST(SimilarityMask, SingleTokenUsesFloor) {
  const std::vector<std::vector<double>> v{{1, 2}};
  const auto m = similarity_mask(v, target_nnz(1, PatternKind::kSimilarity));
  EXPECT_EQ(cells_of(m), (Cells{{0, 0}}));
  EXPECT_TRUE(m.pattern().floor_applied);
}

TEST(SimilarityMask, SaturatedBudgetIsCompleteOffDiagonal) {
  const std::vector<std::vector<double>> v{{1, 0}, {0, 1}, {1, 1}, {2, 1}};
  const auto m = similarity_mask(v, 100);
  EXPECT_EQ(m.nnz(), 12u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_FALSE(m.allowed(i, i));
}

TEST(SimilarityMask, AllZeroVectorsFallBackToNeighbour) {
  const std::vector<std::vector<double>> v(4, std::vector<double>{0, 0});
  const auto m = similarity_mask(v, 8);
  EXPECT_TRUE(m.pattern().similarity_fallback);
  EXPECT_EQ(cells_of(m), cells_of(neighbour_mask(4, 1)));
}

TEST(SimilarityMask, ZeroVectorIsNeverLinked) {
  const std::vector<std::vector<double>> v{{1, 0}, {0, 0}, {1, 1}, {0, 1}};
  const auto m = similarity_mask(v, 6);
  for (std::size_t j = 0; j < 4; ++j) {
    if (j != 1) {
      EXPECT_FALSE(m.allowed(1, j));
    }
  }
  EXPECT_TRUE(m.allowed(1, 1));  // floor for the isolated row
}

TEST(SimilarityMask, ReachesBudgetAndStaysSymmetric) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (std::size_t n = 2; n <= 30; ++n) {
    std::vector<std::vector<double>> v(n, std::vector<double>(5));
    for (auto& row : v) {
      for (auto& x : row) x = g(rng);
    }
    const auto m = similarity_mask(v, target_nnz(n, PatternKind::kSimilarity));
    EXPECT_TRUE(m.is_symmetric());
    std::size_t off_diagonal = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool linked = m.row_nnz(i) > (m.allowed(i, i) ? 1u : 0u);
      EXPECT_NE(m.allowed(i, i), linked);  // diagonal only as the floor
      off_diagonal += m.row_nnz(i) - (m.allowed(i, i) ? 1 : 0);
    }
    EXPECT_EQ(off_diagonal, std::min(2 * n, n * n - n));
    EXPECT_EQ(recount_false(m), n * n - m.nnz());
  }
}

TEST(NeighbourMask, FourTokens) {
  const auto m = neighbour_mask(4, 1);
  EXPECT_EQ(m.nnz(), 6u);
  EXPECT_DOUBLE_EQ(m.sparsity(), 10.0 / 16.0);
}

TEST(NeighbourMask, TwoTokens) {
  const auto m = neighbour_mask(2, 1);
  EXPECT_EQ(cells_of(m), (Cells{{0, 1}, {1, 0}}));
  EXPECT_DOUBLE_EQ(m.sparsity(), 0.5);
}

TEST(NeighbourMask, SingleTokenUsesFloor) {
  const auto m = neighbour_mask(1, 1);
  EXPECT_EQ(cells_of(m), (Cells{{0, 0}}));
  EXPECT_TRUE(m.pattern().floor_applied);
}

TEST(NeighbourMask, ExactSparsityFormula) {
  for (std::size_t n = 2; n <= 64; ++n) {
    const auto m = neighbour_mask(n, 1);
    // 1 - 2/n + 2/n^2 = (n^2 - 2n + 2) / n^2, compared as integers.
    ASSERT_EQ(recount_false(m), n * n - 2 * n + 2) << n;
    ASSERT_TRUE(m.is_symmetric());
  }
}

TEST(NeighbourMask, WiderWindowsAndErrors) {
  const auto m = neighbour_mask(6, 2);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      const auto d = i > j ? i - j : j - i;
      EXPECT_EQ(m.allowed(i, j), d > 0 && d <= 2);
    }
  }
  EXPECT_THROW(neighbour_mask(4, 0), StructuralError);
  EXPECT_THROW(neighbour_mask(0, 1), StructuralError);
}

TEST(RandomMask, ThreeTokens) {
  const auto m = random_mask(3, 5, 42);
  EXPECT_EQ(m.nnz(), 5u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_GE(m.row_nnz(i), 1u);
    EXPECT_FALSE(m.allowed(i, i));
  }
}

TEST(RandomMask, DeterministicAndOutDegreeOneOrTwo) {
  for (std::size_t n = 2; n <= 64; ++n) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto a = matched_random_mask(n, seed);
      const auto b = matched_random_mask(n, seed);
      ASSERT_EQ(a, b);
      ASSERT_EQ(a.nnz(), std::min(2 * n - 1, n * n - n));
      for (std::size_t i = 0; i < n; ++i) {
        ASSERT_GE(a.row_nnz(i), 1u);
        ASSERT_LE(a.row_nnz(i), 2u);
      }
    }
  }
}

TEST(RandomMask, SingleTokenUsesFloorAndBudgetIsBounded) {
  const auto m = matched_random_mask(1, 9);
  EXPECT_EQ(cells_of(m), (Cells{{0, 0}}));
  EXPECT_THROW(random_mask(3, 7, 0), StructuralError);
}

TEST(RandomMask, SeedsDiffer) {
  EXPECT_NE(cells_of(matched_random_mask(20, 1)), cells_of(matched_random_mask(20, 2)));
}

// Independent enumeration of the BigBird union for r = 0.
Cells bigbird_oracle(std::size_t n, std::size_t g, int w) {
  Cells out;
  const long lo = -static_cast<long>((w - 1) / 2);
  const long hi = w / 2;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const long off = static_cast<long>(j) - static_cast<long>(i);
      if (i < g || j < g || (w > 0 && off >= lo && off <= hi)) out.emplace(i, j);
    }
  }
  return out;
}

TEST(BigBirdMask, SixTokensTwoGlobalWidthThree) {
  const auto m = bigbird_mask(6, 2, 3, 0, 0);
  std::set<std::size_t> row3;
  for (std::size_t j = 0; j < 6; ++j) {
    if (m.allowed(3, j)) row3.insert(j);
  }
  EXPECT_EQ(row3, (std::set<std::size_t>{0, 1, 2, 3, 4}));
  const auto oracle = bigbird_oracle(6, 2, 3);
  EXPECT_EQ(cells_of(m), oracle);
  EXPECT_EQ(m.nnz(), 30u);
}

TEST(BigBirdMask, MatchesOracleForManyShapes) {
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t g = 0; g <= n; ++g) {
      for (int w = 1; w <= 5 && w <= static_cast<int>(2 * n - 1); ++w) {
        ASSERT_EQ(cells_of(bigbird_mask(n, static_cast<int>(g), w, 0, 0)),
                  bigbird_oracle(n, g, w));
      }
    }
  }
}

TEST(BigBirdMask, EmptyConfigurationUsesFloor) {
  const auto m = bigbird_mask(5, 0, 0, 0, 0);
  EXPECT_EQ(m.nnz(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_TRUE(m.allowed(i, i));
  EXPECT_TRUE(m.pattern().floor_applied);
}

TEST(BigBirdMask, AllGlobalIsDense) {
  EXPECT_DOUBLE_EQ(bigbird_mask(7, 7, 1, 0, 0).sparsity(), 0.0);
}

TEST(BigBirdMask, Errors) {
  EXPECT_THROW(bigbird_mask(4, 5, 3, 0, 0), StructuralError);
  EXPECT_THROW(bigbird_mask(4, 0, 8, 0, 0), StructuralError);
}

TEST(BigBirdMask, MonotoneUnionAndRandomCount) {
  for (std::size_t n = 2; n <= 24; ++n) {
    for (int g = 0; g <= 3 && g <= static_cast<int>(n); ++g) {
      const auto full = cells_of(bigbird_mask(n, g, 3, 3, 11));
      const auto no_random = cells_of(bigbird_mask(n, g, 3, 0, 11));
      const auto local = cells_of(bigbird_mask(n, 0, 3, 0, 11));
      EXPECT_TRUE(std::includes(full.begin(), full.end(), no_random.begin(), no_random.end()));
      EXPECT_TRUE(std::includes(no_random.begin(), no_random.end(), local.begin(), local.end()));
      // Each row gains min(r, available) random cells.
      const auto with_r = bigbird_mask(n, g, 3, 3, 11);
      const auto base = bigbird_mask(n, g, 3, 0, 11);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_EQ(with_r.row_nnz(i), base.row_nnz(i) + std::min<std::size_t>(3, n - base.row_nnz(i)));
      }
    }
  }
}

TEST(BigBirdMask, SparsityMonotoneInWindowAndGlobals) {
  for (std::size_t n = 2; n <= 20; ++n) {
    for (int w = 1; w + 1 <= static_cast<int>(2 * n - 1) && w < 7; ++w) {
      EXPECT_GE(bigbird_mask(n, 1, w, 0, 0).sparsity(), bigbird_mask(n, 1, w + 1, 0, 0).sparsity());
    }
    for (int g = 0; g < static_cast<int>(n); ++g) {
      EXPECT_GE(bigbird_mask(n, g, 3, 0, 0).sparsity(), bigbird_mask(n, g + 1, 3, 0, 0).sparsity());
    }
  }
}

TEST(AttnMaskTest, CachedSparsityMatchesRecountForAllGenerators) {
  std::mt19937_64 rng(23);
  for (std::size_t n = 2; n <= 64; ++n) {
    std::vector<std::vector<double>> v(n, std::vector<double>(3));
    for (auto& row : v) {
      for (auto& x : row) x = static_cast<double>(rng() % 7) - 3.0;
    }
    const std::vector<AttnMask> masks{
        syntax_mask(random_tree(n, rng)), similarity_mask(v, 2 * n), neighbour_mask(n, 1),
        matched_random_mask(n, n), bigbird_mask(n, 2 > n ? 0 : 2, 3, 1, n), AttnMask::dense(n)};
    for (const auto& m : masks) {
      ASSERT_DOUBLE_EQ(m.sparsity(),
                       static_cast<double>(recount_false(m)) / static_cast<double>(n * n));
    }
  }
}

TEST(AttnMaskTest, DenseAndEmptySparsity) {
  EXPECT_DOUBLE_EQ(AttnMask::dense(4).sparsity(), 0.0);
  const AttnMask empty(4, std::vector<std::uint8_t>(16, 0), Pattern{});
  EXPECT_DOUBLE_EQ(empty.sparsity(), 1.0);
}

TEST(PatternLabel, RoundTrips) {
  for (const char* label : {"DENSE", "SYNTAX", "SIMILARITY", "NEIGHBOUR(1)", "NEIGHBOUR(3)",
                            "RANDOM(7)", "BIGBIRD(2,3,3,7)", "RANDOM(18446744073709551615)"}) {
    EXPECT_EQ(parse_pattern_label(label).label(), label);
  }
  EXPECT_THROW(parse_pattern_label("BOGUS"), StructuralError);
  EXPECT_THROW(parse_pattern_label("NEIGHBOUR"), StructuralError);
  EXPECT_THROW(parse_pattern_label("BIGBIRD(1,2)"), StructuralError);
}

TEST(LayerPlan, DefinitionsAtTwelveLayers) {
  auto sparse_set = [](PlanDirection d, int pivot) {
    std::set<int> out;
    const auto flags = sparsified_layers(d, pivot, 12);
    for (int l = 0; l < 12; ++l) {
      if (flags[static_cast<std::size_t>(l)]) out.insert(l + 1);
    }
    return out;
  };
  EXPECT_EQ(sparse_set(PlanDirection::kTopDown, 12), (std::set<int>{12}));
  EXPECT_EQ(sparse_set(PlanDirection::kBottomUp, 3), (std::set<int>{1, 2, 3}));
  std::set<int> all_but_last;
  for (int l = 1; l <= 11; ++l) all_but_last.insert(l);
  EXPECT_EQ(sparse_set(PlanDirection::kAllButLast, 1), all_but_last);
  for (int pivot = 1; pivot <= 12; ++pivot) {
    std::set<int> top, bottom;
    for (int l = pivot; l <= 12; ++l) top.insert(l);
    for (int l = 1; l <= pivot; ++l) bottom.insert(l);
    EXPECT_EQ(sparse_set(PlanDirection::kTopDown, pivot), top);
    EXPECT_EQ(sparse_set(PlanDirection::kBottomUp, pivot), bottom);
  }
}

TEST(LayerPlan, SharesOneMaskAcrossSparseLayers) {
  auto mask = std::make_shared<const AttnMask>(neighbour_mask(5, 1));
  const auto plan = layer_plan(PlanDirection::kTopDown, 3, 4, mask);
  EXPECT_EQ(plan.num_layers(), 4);
  EXPECT_FALSE(plan.is_sparse(0));
  EXPECT_FALSE(plan.is_sparse(1));
  EXPECT_EQ(plan.mask(2), mask.get());
  EXPECT_EQ(plan.mask(3), mask.get());
  EXPECT_THROW(layer_plan(PlanDirection::kTopDown, 0, 4, mask), StructuralError);
  EXPECT_THROW(layer_plan(PlanDirection::kBottomUp, 5, 4, mask), StructuralError);
}

TEST(LayerPlan, DirectionNames) {
  for (auto d : {PlanDirection::kTopDown, PlanDirection::kBottomUp, PlanDirection::kAllButLast}) {
    EXPECT_EQ(parse_plan_direction(to_string(d)), d);
  }
}

}  // namespace
}  // namespace sparselab
