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

#include <cmath>

#include "sparselab/error.hpp"

namespace sparselab::nn {

void attention_forward(const ConstRef& q, const ConstRef& k, const ConstRef& v,
                       MaskRef mask, double scale, Matrix& probs, MutRef out) {
  const Eigen::Index n = q.rows();
  if (k.rows() != n || v.rows() != n) throw StructuralError("Q, K, V row mismatch");
  probs.noalias() = (q * k.transpose()) * scale;
  if (mask.hard != nullptr) {
    if (static_cast<Eigen::Index>(mask.hard->n()) != n) {
      throw StructuralError("mask size " + std::to_string(mask.hard->n()) +
                            " does not match sequence length " + std::to_string(n));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      bool any = false;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (mask.hard->allowed(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) {
          any = true;
        } else {
          probs(i, j) = kMaskedLogit;
        }
      }
      if (!any) throw StructuralError("mask row " + std::to_string(i) + " has empty support");
    }
  } else if (mask.soft != nullptr) {
    if (mask.soft->rows() != n || mask.soft->cols() != n) {
      throw StructuralError("soft mask shape does not match sequence length");
    }
    probs.array() += (mask.soft->array() + kSoftMaskEpsilon).log();
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = probs.row(i);
    const double peak = row.maxCoeff();
    row = (row.array() - peak).exp();
    if (mask.hard != nullptr) {
      // Vectorised exp clamps instead of reaching 0; the leftovers are
      // denormal-adjacent and crawl through every later product.
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!mask.hard->allowed(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) {
          row(j) = 0.0;
        }
      }
    }
    row /= row.sum();
  }
  out.noalias() = probs * v;
}

void attention_backward(const ConstRef& q, const ConstRef& k, const ConstRef& v,
                        const Matrix& probs, const ConstRef& dout, double scale,
                        MutRef dq, MutRef dk, MutRef dv, Matrix* dlogits) {
  dv.noalias() += probs.transpose() * dout;
  Matrix dp = dout * v.transpose();
  // Row-wise softmax Jacobian: dS = P * (dP - rowsum(dP * P)).
  const Eigen::VectorXd inner = (dp.array() * probs.array()).rowwise().sum();
  Matrix ds = probs.array() * (dp.array().colwise() - inner.array());
  dq.noalias() += (ds * k) * scale;
  dk.noalias() += (ds.transpose() * q) * scale;
  if (dlogits != nullptr) *dlogits = std::move(ds);
}

Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v) {
  Matrix probs, out(q.rows(), v.cols());
  attention_forward(q, k, v, MaskRef{}, 1.0 / std::sqrt(static_cast<double>(q.cols())),
                    probs, out);
  return out;
}

Matrix masked_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                        const AttnMask& mask, Matrix* probs) {
  Matrix p, out(q.rows(), v.cols());
  attention_forward(q, k, v, MaskRef{.hard = &mask},
                    1.0 / std::sqrt(static_cast<double>(q.cols())), p, out);
  if (probs != nullptr) *probs = std::move(p);
  return out;
}

Matrix masked_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                        const Matrix& soft_mask, Matrix* probs) {
  Matrix p, out(q.rows(), v.cols());
  attention_forward(q, k, v, MaskRef{.soft = &soft_mask},
                    1.0 / std::sqrt(static_cast<double>(q.cols())), p, out);
  if (probs != nullptr) *probs = std::move(p);
  return out;
}

}  // namespace sparselab::nn
