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

#include "sparselab/nn/attention.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sparselab/maskgen.hpp"

namespace sparselab::nn {
namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

TEST(Attention, HandComputedTwoByTwo) {
  Matrix q(2, 2), k(2, 2), v(2, 2);
  q << 1, 0, 0, 1;
  k << 1, 0, 0, 1;
  v << 1, 2, 3, 4;
  const double s = 1.0 / std::sqrt(2.0);
  const double a = std::exp(s) / (std::exp(s) + 1.0);  // weight on the matching key
  Matrix expected(2, 2);
  expected << a * 1 + (1 - a) * 3, a * 2 + (1 - a) * 4, (1 - a) * 1 + a * 3, (1 - a) * 2 + a * 4;
  EXPECT_TRUE(attention(q, k, v).isApprox(expected, 1e-14));
}

TEST(Attention, ZeroQueriesAverageValues) {
  std::mt19937_64 rng(1);
  const Matrix q = Matrix::Zero(5, 4);
  const Matrix k = random_matrix(5, 4, rng);
  const Matrix v = random_matrix(5, 3, rng);
  const Matrix out = attention(q, k, v);
  const Eigen::RowVectorXd mean = v.colwise().mean();
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_TRUE(out.row(i).isApprox(mean, 1e-13));
}

TEST(Attention, ZeroScoresUnderMaskAverageAllowedValues) {
  std::mt19937_64 rng(2);
  const Matrix q = Matrix::Zero(4, 2);
  const Matrix k = Matrix::Zero(4, 2);
  const Matrix v = random_matrix(4, 2, rng);
  const auto mask = neighbour_mask(4, 1);
  const Matrix out = masked_attention(q, k, v, mask);
  EXPECT_TRUE(out.row(0).isApprox(v.row(1), 1e-14));
  EXPECT_TRUE(out.row(1).isApprox((v.row(0) + v.row(2)) / 2, 1e-14));
  EXPECT_TRUE(out.row(3).isApprox(v.row(2), 1e-14));
}

TEST(Attention, MaskedWeightsVanishAndRowsSumToOne) {
  std::mt19937_64 rng(3);
  for (std::size_t n : {1u, 2u, 7u, 16u}) {
    const Matrix q = random_matrix(n, 8, rng) * 10.0;
    const Matrix k = random_matrix(n, 8, rng) * 10.0;
    const Matrix v = random_matrix(n, 8, rng);
    for (const auto& mask : {neighbour_mask(n, 1), matched_random_mask(n, 4),
                             bigbird_mask(n, 1, 1, 1, 9)}) {
      Matrix probs;
      masked_attention(q, k, v, mask, &probs);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(probs.row(static_cast<Eigen::Index>(i)).sum(), 1.0, 1e-12);
        for (std::size_t j = 0; j < n; ++j) {
          if (!mask.allowed(i, j)) {
            EXPECT_LT(probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 1e-12);
          }
        }
      }
    }
  }
}

TEST(Attention, DenseMaskIsBitIdentical) {
  std::mt19937_64 rng(4);
  const Matrix q = random_matrix(6, 4, rng);
  const Matrix k = random_matrix(6, 4, rng);
  const Matrix v = random_matrix(6, 4, rng);
  const Matrix a = attention(q, k, v);
  const Matrix b = masked_attention(q, k, v, AttnMask::dense(6));
  EXPECT_EQ(a, b);
  const Matrix c = masked_attention(q, k, v, Matrix(Matrix::Ones(6, 6)));
  EXPECT_TRUE(a.isApprox(c, 1e-12));
}

TEST(Attention, PermutingKeysAndValuesTogetherIsInvariant) {
  std::mt19937_64 rng(5);
  const Matrix q = random_matrix(7, 4, rng);
  const Matrix k = random_matrix(7, 4, rng);
  const Matrix v = random_matrix(7, 5, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(7);
  perm.setIdentity();
  std::vector<int> idx(perm.indices().data(), perm.indices().data() + 7);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int i = 0; i < 7; ++i) perm.indices()[i] = idx[static_cast<std::size_t>(i)];
  const Matrix kp = perm * k;
  const Matrix vp = perm * v;
  EXPECT_TRUE(attention(q, k, v).isApprox(attention(q, kp, vp), 1e-12));
}

TEST(Attention, SoftMaskNearZeroBehavesLikeHardMask) {
  std::mt19937_64 rng(6);
  const Matrix q = random_matrix(5, 4, rng);
  const Matrix k = random_matrix(5, 4, rng);
  const Matrix v = random_matrix(5, 4, rng);
  const auto hard = neighbour_mask(5, 1);
  Matrix soft(5, 5);
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) {
      soft(i, j) = hard.allowed(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) ? 1.0 : 0.0;
    }
  }
  EXPECT_TRUE(masked_attention(q, k, v, hard).isApprox(masked_attention(q, k, v, soft), 1e-9));
}

TEST(Attention, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  const Matrix q = random_matrix(4, 3, rng);
  const Matrix k = random_matrix(4, 3, rng);
  const Matrix v = random_matrix(4, 2, rng);
  const Matrix w = random_matrix(4, 2, rng);  // loss = sum(w .* out)
  const auto mask = bigbird_mask(4, 1, 1, 0, 0);
  const double scale = 0.7;
  auto loss = [&](const Matrix& qq, const Matrix& kk, const Matrix& vv) {
    Matrix probs, out(4, 2);
    attention_forward(qq, kk, vv, MaskRef{.hard = &mask}, scale, probs, out);
    return (out.array() * w.array()).sum();
  };
  Matrix probs, out(4, 2);
  attention_forward(q, k, v, MaskRef{.hard = &mask}, scale, probs, out);
  Matrix dq = Matrix::Zero(4, 3), dk = Matrix::Zero(4, 3), dv = Matrix::Zero(4, 2);
  attention_backward(q, k, v, probs, w, scale, dq, dk, dv);
  const double h = 1e-6;
  auto check = [&](const Matrix& base, const Matrix& grad, int which) {
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      Matrix plus = base, minus = base;
      plus.data()[i] += h;
      minus.data()[i] -= h;
      double lp = 0, lm = 0;
      if (which == 0) lp = loss(plus, k, v), lm = loss(minus, k, v);
      if (which == 1) lp = loss(q, plus, v), lm = loss(q, minus, v);
      if (which == 2) lp = loss(q, k, plus), lm = loss(q, k, minus);
      EXPECT_NEAR(grad.data()[i], (lp - lm) / (2 * h), 1e-7);
    }
  };
  check(q, dq, 0);
  check(k, dk, 1);
  check(v, dv, 2);
}

}  // namespace
}  // namespace sparselab::nn
