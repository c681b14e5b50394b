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

#include "sparselab/train/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "sparselab/train/trajectory.hpp"

namespace sparselab::train {

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"learning_rate", c.learning_rate},
                     {"warmup_ratio", c.warmup_ratio},
                     {"seed", c.seed},
                     {"lambda", c.lambda},
                     {"init_sparsity", c.init_sparsity},
                     {"temperature", c.temperature}};
}

void to_json(nlohmann::json& j, const MaskSpec& m) {
  j = nlohmann::json{{"kind", std::string(to_string(m.kind))},
                     {"window", m.window},
                     {"global", m.global},
                     {"random", m.random},
                     {"seed", m.seed}};
}

void to_json(nlohmann::json& j, const FixedPlan& p) {
  j = nlohmann::json{{"mask", p.mask},
                     {"direction", std::string(to_string(p.direction))},
                     {"pivot", p.pivot}};
}

std::string run_key(const nn::EncoderConfig& model, const TrainConfig& config,
                    const FixedPlan* plan) {
  nlohmann::json j{{"model", model}, {"train", config}};
  if (plan != nullptr) {
    j["plan"] = *plan;
    j["mode"] = "fixed";
  } else {
    j["mode"] = "learned";
  }
  return j.dump();  // object keys are sorted, so the text is canonical
}

namespace {

auto entry_tuple(const SweepEntry& e) {
  const auto& m = e.plan.mask;
  return std::make_tuple(static_cast<int>(m.kind), m.window, m.global, m.random,
                         static_cast<int>(e.plan.direction), e.plan.pivot, e.seed);
}

}  // namespace

std::vector<SweepEntry> enumerate(const SweepGrid& grid) {
  std::vector<SweepEntry> out;
  for (const auto& mask : grid.masks) {
    for (auto direction : grid.directions) {
      for (int pivot : grid.pivots) {
        for (auto seed : grid.seeds) {
          SweepEntry e;
          e.seed = seed;
          e.plan.mask = mask;
          e.plan.mask.seed = seed;
          e.plan.direction = direction;
          e.plan.pivot = pivot;
          if (mask.kind == PatternKind::kDense) {
            e.plan.mask = MaskSpec{.kind = PatternKind::kDense, .seed = seed};
            e.plan.direction = PlanDirection::kAllButLast;
          }
          if (e.plan.direction == PlanDirection::kAllButLast) e.plan.pivot = 1;
          out.push_back(e);
        }
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SweepEntry& a, const SweepEntry& b) { return entry_tuple(a) < entry_tuple(b); });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<SweepRow> sweep_fixed(const nn::EncoderConfig& model, const TrainConfig& base,
                                  const SweepGrid& grid, const EncodedDataset& train,
                                  const EncodedDataset& val, unsigned threads) {
  const auto entries = enumerate(grid);
  std::vector<SweepRow> rows(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    TrainConfig cfg = base;
    cfg.seed = entries[i].seed;
    auto result = train_fixed(model, cfg, entries[i].plan, train, val);
    SweepRow& row = rows[i];
    row.entry = entries[i];
    row.config_hash = config_hash(run_key(model, cfg, &entries[i].plan));
    row.accuracy = result.trajectory.epochs.back().val_accuracy;
    row.sparsity = result.trajectory.epochs.back().model_sparsity;
    row.trajectory = std::move(result.trajectory);
  });
  return rows;
}

std::vector<LearnedRow> sweep_learned(const nn::EncoderConfig& model, const TrainConfig& base,
                                      const LearnedGrid& grid, const EncodedDataset& train,
                                      const EncodedDataset& val, unsigned threads) {
  std::set<std::tuple<double, double, std::uint64_t>> keys;
  for (double l : grid.lambdas) {
    for (double s : grid.init_sparsities) {
      for (auto seed : grid.seeds) keys.emplace(l, s, seed);
    }
  }
  std::vector<TrainConfig> configs;
  for (const auto& [l, s, seed] : keys) {
    TrainConfig c = base;
    c.lambda = l;
    c.init_sparsity = s;
    c.seed = seed;
    configs.push_back(c);
  }
  std::vector<LearnedRow> rows(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t i) {
    auto result = train_learned(model, configs[i], train, val);
    LearnedRow& row = rows[i];
    row.config = configs[i];
    row.config_hash = config_hash(run_key(model, configs[i], nullptr));
    row.accuracy = result.trajectory.epochs.back().val_accuracy;
    row.sparsity = result.trajectory.epochs.back().model_sparsity;
    row.trajectory = std::move(result.trajectory);
  });
  return rows;
}

}  // namespace sparselab::train
