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
#include <span>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "sparselab/nn/params.hpp"

namespace sparselab::nn {

inline constexpr double kDefaultTemperature = 10.0;

double sigmoid(double x);
double logit(double p);

// Learnable fractional neighbour degrees, one per (head, layer). The stored
// free variable theta maps to delta = sigmoid(theta), so delta stays in (0, 1).
class DegreeParams {
 public:
  DegreeParams(int num_heads, int num_layers, double initial_theta = 0.0,
               double temperature = kDefaultTemperature);

  int num_heads() const { return static_cast<int>(theta_.rows()); }
  int num_layers() const { return static_cast<int>(theta_.cols()); }
  double temperature() const { return temperature_; }

  double& theta(int head, int layer) { return theta_(head, layer); }
  double theta(int head, int layer) const { return theta_(head, layer); }
  double delta(int head, int layer) const { return sigmoid(theta_(head, layer)); }

  // H x L views.
  Matrix& thetas() { return theta_; }
  const Matrix& thetas() const { return theta_; }
  Matrix deltas() const;

 private:
  Matrix theta_;
  double temperature_;
};

void to_json(nlohmann::json& j, const DegreeParams& d);
DegreeParams degrees_from_json(const nlohmann::json& j);

// ceil(delta * n).
std::size_t hard_degree(double delta, std::size_t n);

// Number of cells with |i - j| <= radius in an n x n matrix.
std::size_t band_nnz(std::size_t n, std::size_t radius);

// m[i][j] = sigmoid(tau * (delta * n - |i - j|)).
Matrix soft_neighbour_mask(double delta, std::size_t n, double tau);

// d m[i][j] / d delta.
Matrix soft_neighbour_mask_grad(double delta, std::size_t n, double tau);

// Mean delta over all heads and layers.
double density_regularizer(const DegreeParams& degrees);
// Gradient of density_regularizer with respect to theta (H x L).
Matrix density_regularizer_grad(const DegreeParams& degrees);

// 1 - mean over sparsified layers and all heads of band_nnz(n, ceil(delta n)) / n^2.
// Returns 0 when no layer is sparsified.
double model_sparsity(const DegreeParams& degrees, std::size_t n,
                      const std::vector<bool>& sparse_layers);

// Learned-degree runs sparsify every layer but the last.
std::vector<bool> learned_sparse_layers(int num_layers);

// Degrees whose model_sparsity at length n is as close as possible to
// `target`. Every head gets the delta for one of the two band radii that
// bracket the target, in the proportion that best matches it.
DegreeParams degrees_for_sparsity(int num_heads, int num_layers, std::size_t n,
                                  double target, double temperature = kDefaultTemperature);

// Largest delta whose hard degree at length n equals `radius`.
double delta_for_radius(std::size_t radius, std::size_t n);

// Largest theta whose sigmoid still maps to `radius` under the ceiling rule.
double theta_for_radius(std::size_t radius, std::size_t n);

}  // namespace sparselab::nn
