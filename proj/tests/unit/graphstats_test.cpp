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

#include "sparselab/graphstats.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <sstream>

#include "sparselab/maskgen.hpp"

namespace sparselab {
namespace {

// Floyd-Warshall over the symmetrised mask; independent of the BFS code.
struct Oracle {
  bool connected = true;
  std::size_t diameter = 0;
  double avg = 0;
};

Oracle floyd_warshall(const AttnMask& m) {
  const std::size_t n = m.n();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> d(n * n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    d[i * n + i] = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && (m.allowed(i, j) || m.allowed(j, i))) d[i * n + j] = 1;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
      }
    }
  }
  Oracle o;
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (d[i * n + j] == kInf) {
        o.connected = false;
        continue;
      }
      sum += d[i * n + j];
      o.diameter = std::max(o.diameter, static_cast<std::size_t>(d[i * n + j]));
    }
  }
  o.avg = n > 1 ? sum / static_cast<double>(n * (n - 1) / 2) : 0.0;
  return o;
}

TEST(GraphStats, PathGraph) {
  for (std::size_t n = 2; n <= 40; ++n) {
    const auto s = stats(neighbour_mask(n, 1));
    ASSERT_TRUE(s.connected());
    EXPECT_EQ(*s.diameter, n - 1);
    EXPECT_NEAR(*s.avg_shortest_path, (static_cast<double>(n) + 1) / 3, 1e-12);
  }
}

TEST(GraphStats, Star) {
  // One global token with no band is a star centred on token 0.
  const auto s = stats(bigbird_mask(5, 1, 0, 0, 0));
  EXPECT_EQ(*s.diameter, 2u);
  EXPECT_NEAR(*s.avg_shortest_path, (4 * 1.0 + 6 * 2.0) / 10.0, 1e-12);
}

TEST(GraphStats, DisjointEdgesAreInfinite) {
  std::vector<std::uint8_t> cells(16, 0);
  cells[0 * 4 + 1] = cells[1 * 4 + 0] = 1;
  cells[2 * 4 + 3] = cells[3 * 4 + 2] = 1;
  const auto s = stats(AttnMask(4, cells, Pattern{}));
  EXPECT_EQ(s.n_components, 2u);
  EXPECT_FALSE(s.diameter.has_value());
  EXPECT_FALSE(s.avg_shortest_path.has_value());
}

TEST(GraphStats, SingleTokenAndDense) {
  const auto one = stats(neighbour_mask(1, 1));
  EXPECT_EQ(*one.diameter, 0u);
  EXPECT_DOUBLE_EQ(*one.avg_shortest_path, 0.0);
  const auto dense = stats(AttnMask::dense(6));
  EXPECT_EQ(*dense.diameter, 1u);
  EXPECT_DOUBLE_EQ(*dense.avg_shortest_path, 1.0);
}

TEST(GraphStats, DirectedEdgeCountsBothWays) {
  std::vector<std::uint8_t> cells(9, 0);
  cells[0 * 3 + 1] = 1;
  cells[2 * 3 + 1] = 1;
  const auto s = stats(AttnMask(3, cells, Pattern{}));
  EXPECT_TRUE(s.connected());
  EXPECT_EQ(*s.diameter, 2u);
}

TEST(GraphStats, MatchesFloydWarshallOnRandomMasks) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<std::uint8_t> cells(n * n);
    const double p = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
    for (auto& c : cells) c = std::bernoulli_distribution(p)(rng) ? 1 : 0;
    const AttnMask m(n, cells, Pattern{});
    const auto s = stats(m);
    const auto o = floyd_warshall(m);
    ASSERT_EQ(s.connected(), o.connected);
    if (o.connected) {
      ASSERT_EQ(*s.diameter, o.diameter);
      ASSERT_NEAR(*s.avg_shortest_path, o.avg, 1e-12);
    }
  }
}

TEST(GraphStats, BatchSummaryAndCsv) {
  const auto a = neighbour_mask(4, 1);
  const auto b = neighbour_mask(7, 1);
  std::vector<std::uint8_t> cells(16, 0);
  cells[1] = cells[4] = 1;
  const AttnMask broken(4, cells, Pattern{});
  const std::vector<LabeledMask> items{{"NB", &a}, {"NB", &b}, {"X", &broken}};
  const auto rows = stats_batch(items);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].pattern, "NB");
  EXPECT_EQ(rows[0].count, 2u);
  EXPECT_DOUBLE_EQ(rows[0].mean_n, 5.5);
  EXPECT_DOUBLE_EQ(*rows[0].mean_diameter, 4.5);
  EXPECT_DOUBLE_EQ(*rows[0].mean_avg_shortest_path, (5.0 / 3 + 8.0 / 3) / 2);
  EXPECT_DOUBLE_EQ(rows[1].infinite_fraction, 1.0);
  EXPECT_FALSE(rows[1].mean_diameter.has_value());

  std::ostringstream out;
  write_stats_csv_header(out);
  write_stats_csv_row(out, "X", stats(broken));
  EXPECT_NE(out.str().find("X,4,inf,inf,3,1"), std::string::npos);
}

}  // namespace
}  // namespace sparselab
