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

#include "sparselab/nn/encoder.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "sparselab/error.hpp"
#include "sparselab/nn/attention.hpp"

namespace sparselab::nn {

namespace {

constexpr double kLayerNormEpsilon = 1e-5;

using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

Matrix layer_norm(const Matrix& x, const ConstMatrixMap& gain, const ConstMatrixMap& bias,
                  LayerNormCache& cache) {
  const Eigen::VectorXd mean = x.rowwise().mean();
  cache.normalized = x.colwise() - mean;
  const Eigen::VectorXd var = cache.normalized.array().square().rowwise().mean();
  cache.inv_std = (var.array() + kLayerNormEpsilon).rsqrt();
  cache.normalized.array().colwise() *= cache.inv_std.array();
  Matrix out = cache.normalized.array().rowwise() * gain.row(0).array();
  out.rowwise() += bias.row(0);
  return out;
}

Matrix layer_norm_backward(const Matrix& dout, const LayerNormCache& cache,
                           const ConstMatrixMap& gain, MatrixMap dgain, MatrixMap dbias) {
  dgain.row(0) += (dout.array() * cache.normalized.array()).colwise().sum().matrix();
  dbias.row(0) += dout.colwise().sum();
  const Matrix dxhat = dout.array().rowwise() * gain.row(0).array();
  const Eigen::VectorXd mean_dxhat = dxhat.rowwise().mean();
  const Eigen::VectorXd mean_dxhat_xhat =
      (dxhat.array() * cache.normalized.array()).rowwise().mean();
  Matrix dx = dxhat.colwise() - mean_dxhat;
  dx -= (cache.normalized.array().colwise() * mean_dxhat_xhat.array()).matrix();
  dx.array().colwise() *= cache.inv_std.array();
  return dx;
}

double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
}

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  return cdf + x * pdf;
}

Matrix affine(const Matrix& x, const ConstMatrixMap& w, const ConstMatrixMap& b) {
  Matrix out = x * w;
  out.rowwise() += b.row(0);
  return out;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix m(rows, cols);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = keep(rng) ? scale : 0.0;
  return m;
}

}  // namespace

Matrix encoder_forward(const ModelParams& params, std::span<const EncoderExample> batch,
                       const ForwardOptions& options, ForwardTrace* trace) {
  const EncoderConfig& cfg = params.config();
  const int L = cfg.num_layers;
  const int H = cfg.num_heads;
  const Eigen::Index d = cfg.d_model;
  const Eigen::Index dh = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool dropout = options.training && cfg.dropout > 0.0;
  if (dropout && options.rng == nullptr) throw StructuralError("dropout needs an rng");
  if (batch.empty()) throw StructuralError("empty batch");
  if (options.degrees != nullptr &&
      (options.degrees->num_heads() != H || options.degrees->num_layers() != L)) {
    throw StructuralError("degree grid does not match the encoder");
  }

  ForwardTrace local;
  ForwardTrace& t = trace != nullptr ? *trace : local;
  t = ForwardTrace{};
  t.used_degrees = options.degrees != nullptr;
  t.mask_applications.assign(static_cast<std::size_t>(L), 0);
  std::size_t rows = 0;
  for (const auto& ex : batch) {
    const std::size_t n = ex.tokens.size();
    if (n == 0) throw StructuralError("empty sequence");
    if (n > static_cast<std::size_t>(cfg.max_len)) {
      throw StructuralError("sequence of length " + std::to_string(n) + " exceeds max_len " +
                            std::to_string(cfg.max_len));
    }
    if (ex.plan != nullptr && ex.plan->num_layers() != L) {
      throw StructuralError("layer plan does not match the encoder depth");
    }
    t.offsets.push_back(rows);
    t.lengths.push_back(n);
    t.tokens.emplace_back(ex.tokens.begin(), ex.tokens.end());
    rows += n;
  }
  const auto R = static_cast<Eigen::Index>(rows);

  Matrix x(R, d);
  {
    const auto tok = params.token_embedding();
    const auto pos = params.position_embedding();
    for (std::size_t b = 0; b < batch.size(); ++b) {
      for (std::size_t p = 0; p < t.lengths[b]; ++p) {
        const int id = t.tokens[b][p];
        if (id < 0 || id >= cfg.vocab_size) {
          throw StructuralError("token id " + std::to_string(id) + " out of range");
        }
        x.row(static_cast<Eigen::Index>(t.offsets[b] + p)) =
            tok.row(id) + pos.row(static_cast<Eigen::Index>(p));
      }
    }
  }

  // Soft masks depend only on (head, length) within a layer.
  std::map<std::pair<int, std::size_t>, Matrix> soft_cache;
  t.layers.resize(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    LayerTrace& lt = t.layers[static_cast<std::size_t>(l)];
    const bool soft_layer = options.degrees != nullptr && l < L - 1;
    lt.input = x;
    lt.ln1_out = layer_norm(x, params.layer(l, LayerTensor::kLn1Gain),
                            params.layer(l, LayerTensor::kLn1Bias), lt.ln1);
    lt.q = affine(lt.ln1_out, params.layer(l, LayerTensor::kQueryWeight),
                  params.layer(l, LayerTensor::kQueryBias));
    lt.k = affine(lt.ln1_out, params.layer(l, LayerTensor::kKeyWeight),
                  params.layer(l, LayerTensor::kKeyBias));
    lt.v = affine(lt.ln1_out, params.layer(l, LayerTensor::kValueWeight),
                  params.layer(l, LayerTensor::kValueBias));
    lt.context.resize(R, d);
    lt.probs.resize(batch.size() * static_cast<std::size_t>(H));
    lt.soft_masks.resize(soft_layer ? lt.probs.size() : 0);
    lt.hard_masks.assign(lt.probs.size(), nullptr);
    soft_cache.clear();

    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto off = static_cast<Eigen::Index>(t.offsets[b]);
      const std::size_t n = t.lengths[b];
      const auto len = static_cast<Eigen::Index>(n);
      const AttnMask* hard = nullptr;
      if (!soft_layer && batch[b].plan != nullptr) {
        const AttnMask* m = batch[b].plan->mask(l);
        if (m != nullptr && !m->is_dense()) hard = m;
        if (m != nullptr && m->n() != n) {
          throw StructuralError("mask size " + std::to_string(m->n()) +
                                " does not match sequence length " + std::to_string(n));
        }
      }
      for (int h = 0; h < H; ++h) {
        const std::size_t slot = b * static_cast<std::size_t>(H) + static_cast<std::size_t>(h);
        MaskRef mask;
        if (soft_layer) {
          auto key = std::make_pair(h, n);
          auto it = soft_cache.find(key);
          if (it == soft_cache.end()) {
            it = soft_cache
                     .emplace(key, soft_neighbour_mask(options.degrees->delta(h, l), n,
                                                       options.degrees->temperature()))
                     .first;
          }
          lt.soft_masks[slot] = it->second;
          mask.soft = &lt.soft_masks[slot];
        } else {
          mask.hard = hard;
          lt.hard_masks[slot] = hard;
        }
        if (mask.soft != nullptr || mask.hard != nullptr) {
          ++t.mask_applications[static_cast<std::size_t>(l)];
        }
        const Eigen::Index col = h * dh;
        attention_forward(lt.q.block(off, col, len, dh), lt.k.block(off, col, len, dh),
                          lt.v.block(off, col, len, dh), mask, scale, lt.probs[slot],
                          lt.context.block(off, col, len, dh));
      }
    }

    Matrix attn_out = affine(lt.context, params.layer(l, LayerTensor::kOutWeight),
                             params.layer(l, LayerTensor::kOutBias));
    if (dropout) {
      lt.attn_dropout = dropout_mask(R, d, cfg.dropout, *options.rng);
      attn_out.array() *= lt.attn_dropout.array();
    }
    lt.residual = x + attn_out;
    lt.ln2_out = layer_norm(lt.residual, params.layer(l, LayerTensor::kLn2Gain),
                            params.layer(l, LayerTensor::kLn2Bias), lt.ln2);
    lt.ff_pre = affine(lt.ln2_out, params.layer(l, LayerTensor::kFf1Weight),
                       params.layer(l, LayerTensor::kFf1Bias));
    lt.ff_act = lt.ff_pre.unaryExpr([](double v) { return gelu(v); });
    Matrix ff_out = affine(lt.ff_act, params.layer(l, LayerTensor::kFf2Weight),
                           params.layer(l, LayerTensor::kFf2Bias));
    if (dropout) {
      lt.ff_dropout = dropout_mask(R, d, cfg.dropout, *options.rng);
      ff_out.array() *= lt.ff_dropout.array();
    }
    x = lt.residual + ff_out;
  }

  t.cls_rows.resize(static_cast<Eigen::Index>(batch.size()), d);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    t.cls_rows.row(static_cast<Eigen::Index>(b)) = x.row(static_cast<Eigen::Index>(t.offsets[b]));
  }
  t.cls_out = layer_norm(t.cls_rows, params.final_ln_gain(), params.final_ln_bias(), t.final_ln);
  t.logits = affine(t.cls_out, params.classifier_weight(), params.classifier_bias());
  if (!t.logits.allFinite()) throw StructuralError("non-finite logits");
  return t.logits;
}

void backward(const ModelParams& params, const ForwardTrace& t, const Matrix& dlogits,
              ModelParams& grads, const DegreeParams* degrees, Matrix* theta_grad) {
  const EncoderConfig& cfg = params.config();
  const int L = cfg.num_layers;
  const int H = cfg.num_heads;
  const Eigen::Index d = cfg.d_model;
  const Eigen::Index dh = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const std::size_t B = t.lengths.size();
  if (dlogits.rows() != static_cast<Eigen::Index>(B) || dlogits.cols() != cfg.num_classes) {
    throw StructuralError("dlogits shape does not match the trace");
  }
  if (t.used_degrees && theta_grad != nullptr) {
    if (degrees == nullptr) throw StructuralError("theta gradient needs the degree params");
    if (theta_grad->rows() != H || theta_grad->cols() != L) theta_grad->setZero(H, L);
  }

  grads.classifier_weight() += t.cls_out.transpose() * dlogits;
  grads.classifier_bias().row(0) += dlogits.colwise().sum();
  const Matrix dcls_out = dlogits * params.classifier_weight().transpose();
  const Matrix dcls = layer_norm_backward(dcls_out, t.final_ln, params.final_ln_gain(),
                                          grads.final_ln_gain(), grads.final_ln_bias());
  const Eigen::Index R = t.layers.front().input.rows();
  Matrix dx = Matrix::Zero(R, d);
  for (std::size_t b = 0; b < B; ++b) {
    dx.row(static_cast<Eigen::Index>(t.offsets[b])) = dcls.row(static_cast<Eigen::Index>(b));
  }

  Matrix ds;
  for (int l = L - 1; l >= 0; --l) {
    const LayerTrace& lt = t.layers[static_cast<std::size_t>(l)];

    // Feed-forward branch.
    Matrix dff = dx;
    if (lt.ff_dropout.size() > 0) dff.array() *= lt.ff_dropout.array();
    grads.layer(l, LayerTensor::kFf2Weight) += lt.ff_act.transpose() * dff;
    grads.layer(l, LayerTensor::kFf2Bias).row(0) += dff.colwise().sum();
    Matrix dpre = dff * params.layer(l, LayerTensor::kFf2Weight).transpose();
    dpre.array() *= lt.ff_pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
    grads.layer(l, LayerTensor::kFf1Weight) += lt.ln2_out.transpose() * dpre;
    grads.layer(l, LayerTensor::kFf1Bias).row(0) += dpre.colwise().sum();
    const Matrix dln2 = dpre * params.layer(l, LayerTensor::kFf1Weight).transpose();
    Matrix dres = dx + layer_norm_backward(dln2, lt.ln2, params.layer(l, LayerTensor::kLn2Gain),
                                           grads.layer(l, LayerTensor::kLn2Gain),
                                           grads.layer(l, LayerTensor::kLn2Bias));

    // Attention branch.
    Matrix dattn = dres;
    if (lt.attn_dropout.size() > 0) dattn.array() *= lt.attn_dropout.array();
    grads.layer(l, LayerTensor::kOutWeight) += lt.context.transpose() * dattn;
    grads.layer(l, LayerTensor::kOutBias).row(0) += dattn.colwise().sum();
    const Matrix dctx = dattn * params.layer(l, LayerTensor::kOutWeight).transpose();
    Matrix dq = Matrix::Zero(R, d), dk = Matrix::Zero(R, d), dv = Matrix::Zero(R, d);
    const bool soft_layer = !lt.soft_masks.empty();
    for (std::size_t b = 0; b < B; ++b) {
      const auto off = static_cast<Eigen::Index>(t.offsets[b]);
      const auto len = static_cast<Eigen::Index>(t.lengths[b]);
      for (int h = 0; h < H; ++h) {
        const std::size_t slot = b * static_cast<std::size_t>(H) + static_cast<std::size_t>(h);
        const Eigen::Index col = h * dh;
        const bool want_ds = soft_layer && theta_grad != nullptr && degrees != nullptr;
        attention_backward(lt.q.block(off, col, len, dh), lt.k.block(off, col, len, dh),
                           lt.v.block(off, col, len, dh), lt.probs[slot],
                           dctx.block(off, col, len, dh), scale,
                           dq.block(off, col, len, dh), dk.block(off, col, len, dh),
                           dv.block(off, col, len, dh), want_ds ? &ds : nullptr);
        if (want_ds) {
          // logits += log(m + eps), m = sigmoid(tau (delta n - |i-j|)).
          const Matrix& m = lt.soft_masks[slot];
          const double delta = degrees->delta(h, l);
          const double dm_scale = degrees->temperature() * static_cast<double>(len);
          const double dddelta =
              (ds.array() * m.array() * (1.0 - m.array()) * dm_scale /
               (m.array() + kSoftMaskEpsilon))
                  .sum();
          (*theta_grad)(h, l) += dddelta * delta * (1.0 - delta);
        }
      }
    }
    grads.layer(l, LayerTensor::kQueryWeight) += lt.ln1_out.transpose() * dq;
    grads.layer(l, LayerTensor::kQueryBias).row(0) += dq.colwise().sum();
    grads.layer(l, LayerTensor::kKeyWeight) += lt.ln1_out.transpose() * dk;
    grads.layer(l, LayerTensor::kKeyBias).row(0) += dk.colwise().sum();
    grads.layer(l, LayerTensor::kValueWeight) += lt.ln1_out.transpose() * dv;
    grads.layer(l, LayerTensor::kValueBias).row(0) += dv.colwise().sum();
    Matrix dln1 = dq * params.layer(l, LayerTensor::kQueryWeight).transpose();
    dln1.noalias() += dk * params.layer(l, LayerTensor::kKeyWeight).transpose();
    dln1.noalias() += dv * params.layer(l, LayerTensor::kValueWeight).transpose();
    dx = dres + layer_norm_backward(dln1, lt.ln1, params.layer(l, LayerTensor::kLn1Gain),
                                    grads.layer(l, LayerTensor::kLn1Gain),
                                    grads.layer(l, LayerTensor::kLn1Bias));
  }

  auto dtok = grads.token_embedding();
  auto dpos = grads.position_embedding();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t p = 0; p < t.lengths[b]; ++p) {
      const auto row = dx.row(static_cast<Eigen::Index>(t.offsets[b] + p));
      dtok.row(t.tokens[b][p]) += row;
      dpos.row(static_cast<Eigen::Index>(p)) += row;
    }
  }
}

double cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* dlogits) {
  const Eigen::Index B = logits.rows();
  if (static_cast<std::size_t>(B) != labels.size()) {
    throw StructuralError("label count does not match logits");
  }
  if (dlogits != nullptr) dlogits->resize(B, logits.cols());
  double total = 0;
  for (Eigen::Index b = 0; b < B; ++b) {
    const int y = labels[static_cast<std::size_t>(b)];
    if (y < 0 || y >= logits.cols()) throw StructuralError("label out of range");
    const double peak = logits.row(b).maxCoeff();
    const RowVector e = (logits.row(b).array() - peak).exp();
    const double z = e.sum();
    total += std::log(z) + peak - logits(b, y);
    if (dlogits != nullptr) {
      dlogits->row(b) = e / z;
      (*dlogits)(b, y) -= 1.0;
      dlogits->row(b) /= static_cast<double>(B);
    }
  }
  return total / static_cast<double>(B);
}

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index b = 0; b < logits.rows(); ++b) {
    Eigen::Index arg = 0;
    logits.row(b).maxCoeff(&arg);
    out[static_cast<std::size_t>(b)] = static_cast<int>(arg);
  }
  return out;
}

}  // namespace sparselab::nn
