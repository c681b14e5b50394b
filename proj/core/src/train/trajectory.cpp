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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "sparselab/error.hpp"

namespace sparselab::train {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Moments {
  double mean = 0;
  double sd = 0;
};

template <typename Get>
Moments moments(std::span<const AccuracyPoint> pts, Get get) {
  Moments m;
  if (pts.empty()) return m;
  for (const auto& p : pts) m.mean += get(p);
  m.mean /= static_cast<double>(pts.size());
  if (pts.size() > 1) {
    double ss = 0;
    for (const auto& p : pts) ss += (get(p) - m.mean) * (get(p) - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(pts.size() - 1));
  }
  return m;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'", line);
  }
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(std::string_view canonical_text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical_text)));
  return buf;
}

std::vector<TrajectoryRow> trajectory_rows(const Trajectory& t, const std::string& hash) {
  std::vector<TrajectoryRow> rows;
  for (const auto& e : t.epochs) {
    if (e.epoch > 0) {
      rows.push_back({hash, e.epoch, "train", e.train_accuracy, e.model_sparsity, e.reg_value,
                      e.train_loss});
    }
    rows.push_back({hash, e.epoch, "val", e.val_accuracy, e.model_sparsity, e.end_reg_value,
                    e.val_loss});
  }
  return rows;
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRow> rows, bool header) {
  if (header) out << kTrajectoryHeader << '\n';
  for (const auto& r : rows) {
    out << r.config_hash << ',' << r.epoch << ',' << r.split << ',' << fmt(r.accuracy) << ','
        << fmt(r.sparsity) << ',' << fmt(r.reg_value) << ',' << fmt(r.loss) << '\n';
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw ParseError("missing trajectory header", 1);
  }
  std::vector<TrajectoryRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7) {
      throw ParseError("expected 7 fields, got " + std::to_string(f.size()),
                       lineno);
    }
    TrajectoryRow r;
    r.config_hash = f[0];
    const double epoch = parse_number(f[1], lineno);
    if (epoch < 0 || epoch != std::floor(epoch)) {
      throw ParseError("bad epoch '" + f[1] + "'", lineno);
    }
    r.epoch = static_cast<int>(epoch);
    if (f[2] != "train" && f[2] != "val") {
      throw ParseError("bad split '" + f[2] + "'", lineno);
    }
    r.split = f[2];
    r.accuracy = parse_number(f[3], lineno);
    r.sparsity = parse_number(f[4], lineno);
    r.reg_value = parse_number(f[5], lineno);
    r.loss = parse_number(f[6], lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<bool> accuracy_outliers(std::span<const AccuracyPoint> sorted, std::size_t window,
                                    double outlier_sd) {
  const std::size_t n = sorted.size();
  std::vector<bool> out(n, false);
  if (outlier_sd <= 0 || window < 2 || n < 3) return out;
  std::vector<AccuracyPoint> neighbours;
  for (std::size_t i = 0; i < n; ++i) {
    // `window` nearest positions around i, shifted inward at the edges.
    const std::size_t want = std::min(window, n - 1);
    std::size_t lo = i >= want / 2 ? i - want / 2 : 0;
    if (lo + want + 1 > n) lo = n - want - 1;
    neighbours.clear();
    for (std::size_t k = lo; k <= lo + want; ++k) {
      if (k != i) neighbours.push_back(sorted[k]);
    }
    const auto m = moments(neighbours, [](const AccuracyPoint& p) { return p.accuracy; });
    if (m.sd > 0 && sorted[i].accuracy < m.mean - outlier_sd * m.sd) out[i] = true;
  }
  return out;
}

std::vector<CurvePoint> rolling_curve(std::vector<AccuracyPoint> points,
                                      const CurveOptions& options) {
  if (options.window == 0) throw StructuralError("window must be positive");
  std::stable_sort(points.begin(), points.end(),
                   [](const AccuracyPoint& a, const AccuracyPoint& b) {
                     return a.sparsity < b.sparsity;
                   });
  const auto drop = accuracy_outliers(points, options.window, options.outlier_sd);
  std::vector<AccuracyPoint> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!drop[i]) kept.push_back(points[i]);
  }
  std::vector<CurvePoint> curve;
  if (kept.empty()) return curve;
  const std::size_t w = std::min(options.window, kept.size());
  for (std::size_t end = w; end <= kept.size(); ++end) {
    const std::span<const AccuracyPoint> win(kept.data() + end - w, w);
    const auto acc = moments(win, [](const AccuracyPoint& p) { return p.accuracy; });
    const auto sp = moments(win, [](const AccuracyPoint& p) { return p.sparsity; });
    curve.push_back({sp.mean, acc.mean, acc.sd, sp.sd, w});
  }
  return curve;
}

std::vector<AccuracyPoint> pooled_points(std::span<const Trajectory> trajectories) {
  std::vector<AccuracyPoint> pts;
  std::size_t longest = 0;
  for (const auto& t : trajectories) longest = std::max(longest, t.epochs.size());
  for (std::size_t e = 1; e < longest; ++e) {
    for (const auto& t : trajectories) {
      if (e < t.epochs.size()) {
        pts.push_back({t.epochs[e].model_sparsity, t.epochs[e].val_accuracy});
      }
    }
  }
  return pts;
}

std::vector<AccuracyPoint> pooled_points(std::span<const TrajectoryRow> rows) {
  // Epoch-major, runs in order of first appearance.
  std::map<int, std::vector<AccuracyPoint>> by_epoch;
  for (const auto& r : rows) {
    if (r.split == "val" && r.epoch >= 1) by_epoch[r.epoch].push_back({r.sparsity, r.accuracy});
  }
  std::vector<AccuracyPoint> pts;
  for (auto& [epoch, list] : by_epoch) pts.insert(pts.end(), list.begin(), list.end());
  return pts;
}

std::vector<CurvePoint> aggregate_trajectories(std::span<const Trajectory> trajectories,
                                               const CurveOptions& options) {
  return rolling_curve(pooled_points(trajectories), options);
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve) {
  out << kCurveHeader << '\n';
  for (const auto& p : curve) {
    out << fmt(p.sparsity) << ',' << fmt(p.accuracy) << ',' << fmt(p.accuracy_sd) << ','
        << fmt(p.sparsity_sd) << ',' << p.count << '\n';
  }
}

}  // namespace sparselab::train
