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

#include "sparselab/train/trajectory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "sparselab/error.hpp"

namespace sparselab::train {
namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

TEST(Hashing, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(config_hash("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(config_hash("").size(), 16u);
}

TEST(RollingCurve, TwelvePointWindowOracle) {
  // Unsorted input; the oracle sorts by hand.
  std::vector<AccuracyPoint> pts;
  for (int k = 0; k < 12; ++k) {
    const int s = (k * 7) % 12;
    pts.push_back({0.05 * s, 0.5 + 0.01 * s + 0.002 * (s % 3)});
  }
  const auto curve = rolling_curve(pts, {.window = 10, .outlier_sd = 0});
  ASSERT_EQ(curve.size(), 3u);
  for (int start = 0; start < 3; ++start) {
    std::vector<double> acc, sp;
    for (int s = start; s < start + 10; ++s) {
      sp.push_back(0.05 * s);
      acc.push_back(0.5 + 0.01 * s + 0.002 * (s % 3));
    }
    const auto& c = curve[static_cast<std::size_t>(start)];
    EXPECT_NEAR(c.sparsity, mean(sp), 1e-12);
    EXPECT_NEAR(c.accuracy, mean(acc), 1e-12);
    EXPECT_NEAR(c.accuracy_sd, sample_sd(acc), 1e-12);
    EXPECT_NEAR(c.sparsity_sd, sample_sd(sp), 1e-12);
    EXPECT_EQ(c.count, 10u);
  }
}

TEST(RollingCurve, ConstantAccuracyIsFlat) {
  std::vector<AccuracyPoint> pts;
  for (int k = 0; k < 25; ++k) pts.push_back({k / 25.0, 0.8});
  for (const auto& c : rolling_curve(pts)) {
    EXPECT_DOUBLE_EQ(c.accuracy, 0.8);
    EXPECT_NEAR(c.accuracy_sd, 0.0, 1e-12);
  }
}

TEST(RollingCurve, MirroredInputGivesMirroredCurve) {
  std::vector<AccuracyPoint> pts, mirrored;
  for (int k = 0; k < 15; ++k) {
    const double a = 0.6 + 0.3 * std::sin(k * 0.7);
    pts.push_back({k / 14.0, a});
    mirrored.push_back({1.0 - k / 14.0, a});
  }
  const auto c1 = rolling_curve(pts, {.window = 5, .outlier_sd = 0});
  const auto c2 = rolling_curve(mirrored, {.window = 5, .outlier_sd = 0});
  ASSERT_EQ(c1.size(), c2.size());
  for (std::size_t k = 0; k < c1.size(); ++k) {
    const auto& b = c2[c2.size() - 1 - k];
    EXPECT_NEAR(c1[k].accuracy, b.accuracy, 1e-12);
    EXPECT_NEAR(c1[k].sparsity, 1.0 - b.sparsity, 1e-12);
  }
}

TEST(RollingCurve, FewPointsGiveOneWindow) {
  const std::vector<AccuracyPoint> pts{{0.1, 0.5}, {0.3, 0.7}, {0.2, 0.6}};
  const auto curve = rolling_curve(pts);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_EQ(curve[0].count, 3u);
  EXPECT_NEAR(curve[0].accuracy, 0.6, 1e-12);
  EXPECT_TRUE(rolling_curve({}).empty());
  EXPECT_THROW(rolling_curve(pts, {.window = 0}), StructuralError);
}

TEST(RollingCurve, DropsCollapsedRun) {
  std::vector<AccuracyPoint> pts;
  for (int k = 0; k < 20; ++k) pts.push_back({k / 20.0, 0.9 + 0.01 * (k % 3)});
  pts.push_back({0.5, 0.1});
  const auto flags = [&] {
    auto sorted = pts;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.sparsity < b.sparsity; });
    return accuracy_outliers(sorted, 10, 3.0);
  }();
  EXPECT_EQ(std::count(flags.begin(), flags.end(), true), 1);
  for (const auto& c : rolling_curve(pts)) EXPECT_GT(c.accuracy, 0.89);
  // Disabling the rule keeps the point.
  const auto raw = rolling_curve(pts, {.window = 10, .outlier_sd = 0});
  EXPECT_EQ(raw.size(), 12u);
}

Trajectory make_trajectory(double offset) {
  Trajectory t;
  for (int e = 0; e <= 3; ++e) {
    EpochRecord r;
    r.epoch = e;
    r.train_accuracy = 0.5 + 0.1 * e;
    r.train_loss = 1.0 / (e + 1);
    r.val_accuracy = 0.4 + 0.1 * e + offset;
    r.val_loss = 2.0 / (e + 1);
    r.model_sparsity = 0.3 + offset;
    r.reg_value = 0.25;
    r.end_reg_value = 0.2;
    t.epochs.push_back(r);
  }
  return t;
}

TEST(TrajectoryCsv, RowsAndRoundTrip) {
  const auto rows = trajectory_rows(make_trajectory(0.0), "00ff00ff00ff00ff");
  // val for epochs 0..3, train for 1..3.
  ASSERT_EQ(rows.size(), 7u);
  std::stringstream buf;
  write_trajectory_csv(buf, rows);
  EXPECT_EQ(buf.str().substr(0, kTrajectoryHeader.size()), kTrajectoryHeader);
  const auto back = read_trajectory_csv(buf);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(back[k].config_hash, rows[k].config_hash);
    EXPECT_EQ(back[k].epoch, rows[k].epoch);
    EXPECT_EQ(back[k].split, rows[k].split);
    EXPECT_NEAR(back[k].accuracy, rows[k].accuracy, 1e-10);
    EXPECT_NEAR(back[k].loss, rows[k].loss, 1e-10);
  }
}

TEST(TrajectoryCsv, MalformedLineReportsLine) {
  std::stringstream buf;
  buf << kTrajectoryHeader << "\nabc,1,val,0.5,0.1,0,0.3\nabc,x,val\n";
  try {
    read_trajectory_csv(buf);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
}

TEST(Pooling, TrajectoriesAndRowsAgree) {
  const std::vector<Trajectory> runs{make_trajectory(0.0), make_trajectory(0.05)};
  const auto a = pooled_points(runs);
  std::vector<TrajectoryRow> rows;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto r = trajectory_rows(runs[k], "run" + std::to_string(k));
    rows.insert(rows.end(), r.begin(), r.end());
  }
  const auto b = pooled_points(rows);
  ASSERT_EQ(a.size(), 6u);
  ASSERT_EQ(b.size(), a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_NEAR(a[k].accuracy, b[k].accuracy, 1e-10);
    EXPECT_NEAR(a[k].sparsity, b[k].sparsity, 1e-10);
  }
  const auto curve = aggregate_trajectories(runs);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_EQ(curve[0].count, 6u);
}

}  // namespace
}  // namespace sparselab::train
