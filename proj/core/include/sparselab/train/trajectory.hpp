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
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparselab/train/trainer.hpp"

namespace sparselab::train {

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
// 16 lowercase hex digits of fnv1a(text).
std::string config_hash(std::string_view canonical_text);

inline constexpr std::string_view kTrajectoryHeader =
    "config_hash,epoch,split,accuracy,sparsity,reg_value,loss";

struct TrajectoryRow {
  std::string config_hash;
  int epoch = 0;
  std::string split;  // "train" or "val"
  double accuracy = 0;
  double sparsity = 0;
  double reg_value = 0;
  double loss = 0;
  bool operator==(const TrajectoryRow&) const = default;
};

// One "val" row per epoch (including epoch 0) and one "train" row per
// trained epoch.
std::vector<TrajectoryRow> trajectory_rows(const Trajectory& t, const std::string& hash);

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRow> rows,
                          bool header = true);
// Throws ParseError on a bad header or row.
std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in);

struct CurvePoint {
  double sparsity = 0;       // window mean
  double accuracy = 0;       // window mean
  double accuracy_sd = 0;    // sample sd, 0 for one point
  double sparsity_sd = 0;
  std::size_t count = 0;
};

struct CurveOptions {
  std::size_t window = 10;
  double outlier_sd = 3.0;  // <= 0 disables outlier removal
};

struct AccuracyPoint {
  double sparsity = 0;
  double accuracy = 0;
};

// Points whose accuracy lies more than outlier_sd sample deviations below the
// mean of their neighbouring window (the point itself excluded). Input must be
// sorted by sparsity.
std::vector<bool> accuracy_outliers(std::span<const AccuracyPoint> sorted, std::size_t window,
                                    double outlier_sd);

// Pools the points, sorts by sparsity (stable), drops outliers, and emits one
// point per trailing window. Fewer points than the window yield one point.
std::vector<CurvePoint> rolling_curve(std::vector<AccuracyPoint> points,
                                      const CurveOptions& options = {});

// Validation points of epochs >= 1, pooled epoch-major across trajectories.
std::vector<AccuracyPoint> pooled_points(std::span<const Trajectory> trajectories);
std::vector<AccuracyPoint> pooled_points(std::span<const TrajectoryRow> rows);

std::vector<CurvePoint> aggregate_trajectories(std::span<const Trajectory> trajectories,
                                               const CurveOptions& options = {});

inline constexpr std::string_view kCurveHeader =
    "sparsity,accuracy_mean,accuracy_sd,sparsity_sd,count";
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve);

}  // namespace sparselab::train
