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
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sparselab/maskgen.hpp"

namespace sparselab {

// Shortest-path properties of the undirected graph behind a mask (an edge
// wherever either direction is allowed; self-loops ignored). Unset
// optionals mean infinite (disconnected graph).
struct GraphStats {
  std::size_t n = 0;
  std::optional<std::size_t> diameter;
  std::optional<double> avg_shortest_path;
  std::size_t n_components = 0;
  // Sum of shortest-path lengths over unordered pairs; exact when connected.
  std::uint64_t path_length_sum = 0;

  bool connected() const { return n_components == 1; }
};

// BFS from every node. For n = 1 the diameter and average are 0.
GraphStats stats(const AttnMask& mask);

struct LabeledMask {
  std::string pattern;
  const AttnMask* mask = nullptr;
};

struct PatternSummary {
  std::string pattern;
  std::size_t count = 0;
  double mean_n = 0;
  // Means over connected masks only; unset when none is connected.
  std::optional<double> mean_diameter;
  std::optional<double> mean_avg_shortest_path;
  double mean_components = 0;
  double infinite_fraction = 0;
};

// Per-pattern means in order of first appearance.
std::vector<PatternSummary> stats_batch(std::span<const LabeledMask> masks);

// CSV with header "pattern,n,diameter,avg_shortest_path,n_components,infinite_fraction".
// Infinite values print as "inf".
void write_stats_csv_header(std::ostream& out);
void write_stats_csv_row(std::ostream& out, const std::string& pattern,
                         const GraphStats& s);
void write_summary_csv(std::ostream& out, std::span<const PatternSummary> rows);

}  // namespace sparselab
