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

#include <algorithm>
#include <cmath>

#include "sparselab/error.hpp"

namespace sparselab::nn {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

DegreeParams::DegreeParams(int num_heads, int num_layers, double initial_theta,
                           double temperature)
    : theta_(Matrix::Constant(num_heads, num_layers, initial_theta)),
      temperature_(temperature) {
  if (num_heads <= 0 || num_layers <= 0) throw StructuralError("degree grid must be non-empty");
  if (!(temperature > 0)) throw StructuralError("temperature must be positive");
}

Matrix DegreeParams::deltas() const {
  return theta_.unaryExpr([](double t) { return sigmoid(t); });
}

void to_json(nlohmann::json& j, const DegreeParams& d) {
  nlohmann::json rows = nlohmann::json::array();
  for (int h = 0; h < d.num_heads(); ++h) {
    nlohmann::json row = nlohmann::json::array();
    for (int l = 0; l < d.num_layers(); ++l) row.push_back(d.theta(h, l));
    rows.push_back(std::move(row));
  }
  j = nlohmann::json{{"temperature", d.temperature()}, {"theta", std::move(rows)}};
}

DegreeParams degrees_from_json(const nlohmann::json& j) {
  const auto& rows = j.at("theta");
  if (!rows.is_array() || rows.empty() || !rows[0].is_array() || rows[0].empty()) {
    throw StructuralError("theta must be a non-empty H x L array");
  }
  DegreeParams d(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()), 0.0,
                 j.at("temperature").get<double>());
  for (int h = 0; h < d.num_heads(); ++h) {
    const auto& row = rows.at(static_cast<std::size_t>(h));
    if (row.size() != static_cast<std::size_t>(d.num_layers())) {
      throw StructuralError("ragged theta array");
    }
    for (int l = 0; l < d.num_layers(); ++l) {
      d.theta(h, l) = row.at(static_cast<std::size_t>(l)).get<double>();
    }
  }
  return d;
}

std::size_t hard_degree(double delta, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(delta * static_cast<double>(n)));
}

std::size_t band_nnz(std::size_t n, std::size_t radius) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= radius ? i - radius : 0;
    const std::size_t hi = std::min(n - 1, i + radius);
    total += hi - lo + 1;
  }
  return total;
}

Matrix soft_neighbour_mask(double delta, std::size_t n, double tau) {
  const auto size = static_cast<Eigen::Index>(n);
  const double reach = delta * static_cast<double>(n);
  Matrix m(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j < size; ++j) {
      m(i, j) = sigmoid(tau * (reach - static_cast<double>(std::abs(i - j))));
    }
  }
  return m;
}

Matrix soft_neighbour_mask_grad(double delta, std::size_t n, double tau) {
  Matrix m = soft_neighbour_mask(delta, n, tau);
  const double scale = tau * static_cast<double>(n);
  return (m.array() * (1.0 - m.array()) * scale).matrix();
}

double density_regularizer(const DegreeParams& degrees) {
  return degrees.deltas().mean();
}

Matrix density_regularizer_grad(const DegreeParams& degrees) {
  const double count = static_cast<double>(degrees.thetas().size());
  return degrees.thetas().unaryExpr([count](double t) {
    const double s = sigmoid(t);
    return s * (1.0 - s) / count;
  });
}

double model_sparsity(const DegreeParams& degrees, std::size_t n,
                      const std::vector<bool>& sparse_layers) {
  if (n == 0) throw StructuralError("model_sparsity needs n >= 1");
  if (sparse_layers.size() != static_cast<std::size_t>(degrees.num_layers())) {
    throw StructuralError("sparse layer flags do not match the degree grid");
  }
  const double cells = static_cast<double>(n * n);
  double density = 0;
  std::size_t count = 0;
  for (int l = 0; l < degrees.num_layers(); ++l) {
    if (!sparse_layers[static_cast<std::size_t>(l)]) continue;
    for (int h = 0; h < degrees.num_heads(); ++h) {
      density += static_cast<double>(band_nnz(n, hard_degree(degrees.delta(h, l), n))) / cells;
      ++count;
    }
  }
  if (count == 0) return 0.0;
  return 1.0 - density / static_cast<double>(count);
}

std::vector<bool> learned_sparse_layers(int num_layers) {
  std::vector<bool> flags(static_cast<std::size_t>(num_layers), true);
  if (!flags.empty()) flags.back() = false;
  return flags;
}

double delta_for_radius(std::size_t radius, std::size_t n) {
  if (radius == 0 || radius > n) throw StructuralError("radius must be in [1, n]");
  double delta = static_cast<double>(radius) / static_cast<double>(n);
  while (hard_degree(delta, n) > radius) delta = std::nextafter(delta, 0.0);
  if (delta >= 1.0) delta = std::nextafter(1.0, 0.0);
  return delta;
}

double theta_for_radius(std::size_t radius, std::size_t n) {
  // sigmoid(logit(d)) can land a few ulps above d, which is enough to push
  // d*n past an integer and widen the band by one.
  double theta = logit(delta_for_radius(radius, n));
  while (hard_degree(sigmoid(theta), n) > radius) theta = std::nextafter(theta, -1e300);
  return theta;
}

DegreeParams degrees_for_sparsity(int num_heads, int num_layers, std::size_t n,
                                  double target, double temperature) {
  if (n < 2) throw StructuralError("degrees_for_sparsity needs n >= 2");
  const auto flags = learned_sparse_layers(num_layers);
  const double cells = static_cast<double>(n * n);
  auto sparsity_at = [&](std::size_t r) {
    return 1.0 - static_cast<double>(band_nnz(n, r)) / cells;
  };
  // Achievable radii are 1..n-1; sparsity decreases with the radius.
  std::size_t lo = 1;
  while (lo + 1 < n && sparsity_at(lo + 1) >= target) ++lo;
  const std::size_t hi = std::min(lo + 1, n - 1);
  std::size_t sparse_heads = 0;
  for (bool f : flags) sparse_heads += f ? static_cast<std::size_t>(num_heads) : 0;
  if (sparse_heads == 0) sparse_heads = static_cast<std::size_t>(num_heads);

  std::size_t wider = 0;
  const double gap = sparsity_at(lo) - sparsity_at(hi);
  if (gap > 0 && target < sparsity_at(lo)) {
    const double frac = std::clamp((sparsity_at(lo) - target) / gap, 0.0, 1.0);
    wider = static_cast<std::size_t>(std::lround(frac * static_cast<double>(sparse_heads)));
  }
  const double theta_lo = theta_for_radius(lo, n);
  const double theta_hi = theta_for_radius(hi, n);
  DegreeParams degrees(num_heads, num_layers, theta_lo, temperature);
  std::size_t assigned = 0;
  for (int l = 0; l < num_layers; ++l) {
    for (int h = 0; h < num_heads; ++h) {
      if (!flags[static_cast<std::size_t>(l)] && num_layers > 1) continue;
      if (assigned < wider) {
        degrees.theta(h, l) = theta_hi;
        ++assigned;
      }
    }
  }
  return degrees;
}

}  // namespace sparselab::nn
