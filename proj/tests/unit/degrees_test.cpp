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

#include "sparselab/nn/degrees.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "sparselab/error.hpp"

namespace sparselab::nn {
namespace {

// Brute-force count of cells with |i - j| <= radius.
std::size_t band_oracle(std::size_t n, std::size_t radius) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) count += (i > j ? i - j : j - i) <= radius ? 1 : 0;
  }
  return count;
}

TEST(Degrees, HardDegreeCeiling) {
  EXPECT_EQ(hard_degree(0.56, 10), 6u);
  EXPECT_EQ(hard_degree(0.5, 8), 4u);
  EXPECT_EQ(hard_degree(0.0, 8), 0u);
  EXPECT_EQ(hard_degree(1.0, 8), 8u);
}

TEST(Degrees, BandCountMatchesOracle) {
  for (std::size_t n = 1; n <= 20; ++n) {
    for (std::size_t r = 0; r <= n + 1; ++r) ASSERT_EQ(band_nnz(n, r), band_oracle(n, r));
  }
}

TEST(Degrees, SoftMaskTransitionAtReach) {
  const Matrix m = soft_neighbour_mask(0.5, 8, 10.0);
  for (Eigen::Index i = 0; i < 8; ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) {
      const auto d = std::abs(i - j);
      const double expected = 1.0 / (1.0 + std::exp(-10.0 * (4.0 - static_cast<double>(d))));
      EXPECT_NEAR(m(i, j), expected, 1e-15);
      if (d <= 3) {
        EXPECT_GT(m(i, j), 0.9999);
      }
      if (d >= 5) {
        EXPECT_LT(m(i, j), 1e-4);
      }
    }
  }
}

TEST(Degrees, SoftMaskSaturatesNearOne) {
  const Matrix m = soft_neighbour_mask(1.0 - 1e-12, 6, 10.0);
  EXPECT_GT(m.minCoeff(), 0.99);
}

TEST(Degrees, SoftMaskMonotoneInDelta) {
  for (std::size_t n : {3u, 8u, 17u}) {
    Matrix prev = soft_neighbour_mask(0.01, n, 10.0);
    for (double d = 0.02; d < 1.0; d += 0.01) {
      const Matrix cur = soft_neighbour_mask(d, n, 10.0);
      ASSERT_TRUE(((cur - prev).array() >= 0.0).all());
      prev = cur;
    }
  }
}

TEST(Degrees, SoftMaskGradientMatchesFiniteDifference) {
  const double h = 1e-7;
  for (double d : {0.1, 0.37, 0.5, 0.81}) {
    const Matrix g = soft_neighbour_mask_grad(d, 7, 10.0);
    const Matrix fd = (soft_neighbour_mask(d + h, 7, 10.0) - soft_neighbour_mask(d - h, 7, 10.0)) / (2 * h);
    EXPECT_LT((g - fd).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Degrees, RegularizerIsMeanDelta) {
  DegreeParams half(2, 2, 0.0);
  EXPECT_DOUBLE_EQ(density_regularizer(half), 0.5);
  DegreeParams d(2, 2);
  const double deltas[4] = {0.2, 0.4, 0.6, 0.8};
  for (int k = 0; k < 4; ++k) d.theta(k % 2, k / 2) = logit(deltas[k]);
  EXPECT_NEAR(density_regularizer(d), 0.5, 1e-15);
}

TEST(Degrees, RegularizerGradient) {
  DegreeParams d(3, 2);
  for (int k = 0; k < 6; ++k) d.theta(k % 3, k / 3) = -1.5 + 0.6 * k;
  const Matrix g = density_regularizer_grad(d);
  const double h = 1e-6;
  for (int k = 0; k < 6; ++k) {
    DegreeParams p = d, m = d;
    p.theta(k % 3, k / 3) += h;
    m.theta(k % 3, k / 3) -= h;
    EXPECT_NEAR(g(k % 3, k / 3), (density_regularizer(p) - density_regularizer(m)) / (2 * h), 1e-9);
  }
}

TEST(Degrees, ModelSparsityExamples) {
  DegreeParams full(1, 1, 40.0);  // sigmoid saturates to 1
  EXPECT_DOUBLE_EQ(model_sparsity(full, 8, {true}), 0.0);

  DegreeParams half(1, 1, 0.0);
  const double expected = 1.0 - static_cast<double>(band_oracle(8, 4)) / 64.0;
  EXPECT_DOUBLE_EQ(model_sparsity(half, 8, {true}), expected);
  EXPECT_DOUBLE_EQ(expected, 1.0 - 52.0 / 64.0);

  // Radius 0 is the diagonal only.
  EXPECT_DOUBLE_EQ(1.0 - static_cast<double>(band_nnz(8, hard_degree(0.0, 8))) / 64.0, 1.0 - 1.0 / 8);
}

TEST(Degrees, ModelSparsityIgnoresDenseLayers) {
  DegreeParams d(2, 2, 0.0);
  d.theta(0, 1) = 40.0;
  d.theta(1, 1) = 40.0;
  EXPECT_DOUBLE_EQ(model_sparsity(d, 8, learned_sparse_layers(2)), 1.0 - 52.0 / 64.0);
  EXPECT_DOUBLE_EQ(model_sparsity(d, 8, {false, false}), 0.0);
  EXPECT_THROW(model_sparsity(d, 8, {true}), StructuralError);
}

TEST(Degrees, LearnedPlanKeepsLastLayerDense) {
  EXPECT_EQ(learned_sparse_layers(3), (std::vector<bool>{true, true, false}));
  EXPECT_EQ(learned_sparse_layers(1), (std::vector<bool>{false}));
}

TEST(Degrees, InitialSparsityHitsTarget) {
  for (std::size_t n : {8u, 13u, 25u, 64u}) {
    for (double target : {0.3, 0.5, 0.73, 0.9}) {
      const auto d = degrees_for_sparsity(4, 3, n, target);
      const double s = model_sparsity(d, n, learned_sparse_layers(3));
      if (target <= 1.0 - static_cast<double>(band_nnz(n, 1)) / static_cast<double>(n * n)) {
        EXPECT_NEAR(s, target, 0.05) << n << " " << target;
      }
      for (int h = 0; h < 4; ++h) {
        for (int l = 0; l < 3; ++l) {
          EXPECT_GT(d.delta(h, l), 0.0);
          EXPECT_LT(d.delta(h, l), 1.0);
        }
      }
    }
  }
}

TEST(Degrees, DeltaForRadiusIsLargestWithThatRadius) {
  for (std::size_t n : {5u, 12u, 31u}) {
    for (std::size_t r = 1; r < n; ++r) {
      const double d = delta_for_radius(r, n);
      EXPECT_EQ(hard_degree(d, n), r);
      EXPECT_EQ(hard_degree(std::nextafter(d, 1.0) + 1e-12, n), r + 1);
    }
  }
}

TEST(Degrees, ThetaForRadiusSurvivesSigmoid) {
  for (std::size_t n : {5u, 8u, 12u, 31u, 64u}) {
    for (std::size_t r = 1; r < n; ++r) {
      const double t = theta_for_radius(r, n);
      EXPECT_EQ(hard_degree(sigmoid(t), n), r) << n << " " << r;
      EXPECT_EQ(hard_degree(sigmoid(t + 1e-6), n), r + 1) << n << " " << r;
    }
  }
}

TEST(Degrees, JsonRoundTrip) {
  DegreeParams d(2, 3, 0.25, 7.5);
  d.theta(1, 2) = -3.0;
  nlohmann::json j;
  to_json(j, d);
  const auto back = degrees_from_json(j);
  EXPECT_EQ(back.thetas(), d.thetas());
  EXPECT_DOUBLE_EQ(back.temperature(), 7.5);
}

}  // namespace
}  // namespace sparselab::nn
