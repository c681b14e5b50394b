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

#include "sparselab/graphstats.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace sparselab {

namespace {

constexpr std::size_t kUnreached = static_cast<std::size_t>(-1);

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

GraphStats stats(const AttnMask& mask) {
  const std::size_t n = mask.n();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (mask.allowed(i, j) || mask.allowed(j, i)) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }

  GraphStats out;
  out.n = n;
  std::vector<std::size_t> component(n, kUnreached);
  std::vector<std::size_t> dist(n);
  std::vector<std::size_t> queue;
  queue.reserve(n);
  std::size_t diameter = 0;
  std::uint64_t total = 0;
  for (std::size_t src = 0; src < n; ++src) {
    if (component[src] == kUnreached) component[src] = out.n_components++;
    std::fill(dist.begin(), dist.end(), kUnreached);
    dist[src] = 0;
    queue.assign(1, src);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t v = queue[head];
      for (auto u : adj[v]) {
        if (dist[u] == kUnreached) {
          dist[u] = dist[v] + 1;
          component[u] = component[src];
          queue.push_back(u);
        }
      }
    }
    for (std::size_t t = src + 1; t < n; ++t) {
      if (dist[t] != kUnreached) {
        total += dist[t];
        diameter = std::max(diameter, dist[t]);
      }
    }
  }
  out.path_length_sum = total;
  if (out.n_components == 1) {
    out.diameter = diameter;
    const std::size_t pairs = n * (n - 1) / 2;
    out.avg_shortest_path =
        pairs == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(pairs);
  }
  return out;
}

std::vector<PatternSummary> stats_batch(std::span<const LabeledMask> masks) {
  std::vector<PatternSummary> rows;
  std::map<std::string, std::size_t> index;
  struct Acc {
    double n = 0, diameter = 0, avg = 0, components = 0;
    std::size_t finite = 0, count = 0;
  };
  std::vector<Acc> acc;
  for (const auto& item : masks) {
    auto [it, inserted] = index.try_emplace(item.pattern, rows.size());
    if (inserted) {
      PatternSummary row;
      row.pattern = item.pattern;
      rows.push_back(std::move(row));
      acc.emplace_back();
    }
    const GraphStats s = stats(*item.mask);
    Acc& a = acc[it->second];
    a.count += 1;
    a.n += static_cast<double>(s.n);
    a.components += static_cast<double>(s.n_components);
    if (s.diameter) {
      a.finite += 1;
      a.diameter += static_cast<double>(*s.diameter);
      a.avg += *s.avg_shortest_path;
    }
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Acc& a = acc[k];
    auto& r = rows[k];
    const auto count = static_cast<double>(a.count);
    r.count = a.count;
    r.mean_n = a.n / count;
    r.mean_components = a.components / count;
    r.infinite_fraction = static_cast<double>(a.count - a.finite) / count;
    if (a.finite > 0) {
      r.mean_diameter = a.diameter / static_cast<double>(a.finite);
      r.mean_avg_shortest_path = a.avg / static_cast<double>(a.finite);
    }
  }
  return rows;
}

void write_stats_csv_header(std::ostream& out) {
  out << "pattern,n,diameter,avg_shortest_path,n_components,infinite_fraction\n";
}

void write_stats_csv_row(std::ostream& out, const std::string& pattern,
                         const GraphStats& s) {
  out << pattern << ',' << s.n << ','
      << (s.diameter ? std::to_string(*s.diameter) : "inf") << ','
      << (s.avg_shortest_path ? fmt_double(*s.avg_shortest_path) : "inf") << ','
      << s.n_components << ',' << (s.connected() ? "0" : "1") << '\n';
}

void write_summary_csv(std::ostream& out, std::span<const PatternSummary> rows) {
  write_stats_csv_header(out);
  for (const auto& r : rows) {
    out << r.pattern << ',' << fmt_double(r.mean_n) << ','
        << (r.mean_diameter ? fmt_double(*r.mean_diameter) : "inf") << ','
        << (r.mean_avg_shortest_path ? fmt_double(*r.mean_avg_shortest_path) : "inf")
        << ',' << fmt_double(r.mean_components) << ','
        << fmt_double(r.infinite_fraction) << '\n';
  }
}

}  // namespace sparselab
