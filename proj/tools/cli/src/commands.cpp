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

#include "sparselab/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "sparselab/error.hpp"
#include "sparselab/graphstats.hpp"
#include "sparselab/mask_io.hpp"
#include "sparselab/nn/checkpoint.hpp"
#include "sparselab/train/sweep.hpp"
#include "sparselab/train/trajectory.hpp"

namespace sparselab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::vector<std::size_t>> load_trees(const fs::path& path,
                                                 const std::vector<Sentence>& sentences) {
  const auto parsed = load_conllu(path);
  if (parsed.size() != sentences.size()) {
    throw StructuralError(path.string() + ": " + std::to_string(parsed.size()) +
                          " trees for " + std::to_string(sentences.size()) + " sentences");
  }
  std::vector<std::vector<std::size_t>> heads;
  heads.reserve(parsed.size());
  for (std::size_t k = 0; k < parsed.size(); ++k) {
    if (parsed[k].words.size() != sentences[k].words.size()) {
      throw StructuralError(path.string() + ": tree " + std::to_string(k) +
                            " does not match its sentence length");
    }
    heads.push_back(parsed[k].tree.heads);
  }
  return heads;
}

SubwordVocab vocab_for(const DataConfig& data, const Splits& splits) {
  if (data.vocab) return SubwordVocab::load(*data.vocab);
  std::vector<std::vector<std::string>> words;
  for (const auto* part : {&splits.train, &splits.val}) {
    for (const auto& s : *part) words.push_back(s.words);
  }
  return SubwordVocab::covering(words);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError("cannot read '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

AttnMask load_mask_file(const fs::path& path) {
  if (path.extension() == ".bin") {
    const std::string bytes = read_file(path);
    return mask_from_binary(std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
  }
  return load_mask_json(path);
}

// Piece-level masks for one split (no classification position).
std::vector<AttnMask> split_masks(const RunConfig& config, const std::string& split,
                                  const train::MaskSpec& spec) {
  const Splits splits = load_splits(config.data);
  const EncodedSplits enc = encode_splits(config.data, splits);
  const auto& data = split == "val" ? enc.val : enc.train;
  std::vector<AttnMask> masks;
  masks.reserve(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& e = data.examples[k];
    masks.push_back(train::piece_mask(spec, e.ids.size() - 1, e.piece_heads, e.piece_vectors, k));
  }
  return masks;
}

std::string stats_csv(const std::vector<AttnMask>& masks) {
  std::ostringstream csv;
  write_stats_csv_header(csv);
  for (const auto& m : masks) write_stats_csv_row(csv, m.pattern().label(), stats(m));
  return csv.str();
}

// Pattern label without the per-instance seed, so summaries group by family.
std::string family_label(const Pattern& p) {
  if (!p.has_seed()) return p.label();
  std::string label = p.label();
  const auto cut = label.rfind(',');
  if (p.kind == PatternKind::kRandom) return label.substr(0, label.find('('));
  return label.substr(0, cut) + ")";
}

std::string summary_csv(const std::vector<AttnMask>& masks) {
  std::vector<LabeledMask> labeled;
  labeled.reserve(masks.size());
  for (const auto& m : masks) labeled.push_back({family_label(m.pattern()), &m});
  std::ostringstream csv;
  const auto rows = stats_batch(labeled);
  write_summary_csv(csv, rows);
  return csv.str();
}

std::string data_hash_text(const RunConfig& config) {
  return config.raw.contains("data") ? config.raw["data"].dump() : "{}";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

Splits load_splits(const DataConfig& data) {
  Splits s;
  if (data.source == "synthetic") {
    const auto alphabet = default_alphabet(data.alphabet);
    // Separate streams keep the two splits independent.
    s.train = synth_task(data.task, data.train_size, data.length, alphabet, data.seed * 2);
    s.val = synth_task(data.task, data.val_size, data.length, alphabet, data.seed * 2 + 1);
    return s;
  }
  s.train = load_tsv(*data.train, data.num_classes);
  if (data.val) s.val = load_tsv(*data.val, data.num_classes);
  if (data.train_trees) s.train_heads = load_trees(*data.train_trees, s.train);
  if (data.val_trees) {
    if (!data.val) throw StructuralError("data.val_trees given without data.val");
    s.val_heads = load_trees(*data.val_trees, s.val);
  }
  return s;
}

EncodedSplits encode_splits(const DataConfig& data, const Splits& splits) {
  EncodedSplits out;
  if (data.source == "synthetic") {
    out.train = train::encode_words(splits.train, out.index, true, data.num_classes);
    out.val = train::encode_words(splits.val, out.index, false, data.num_classes);
    return out;
  }
  const SubwordVocab vocab = vocab_for(data, splits);
  std::optional<EmbeddingTable> emb;
  if (data.embeddings) emb = load_embeddings(*data.embeddings);
  const EmbeddingTable* e = emb ? &*emb : nullptr;
  out.train = train::encode_sentences(splits.train, vocab, out.index, true, data.num_classes,
                                      splits.train_heads.empty() ? nullptr : &splits.train_heads, e);
  out.val = train::encode_sentences(splits.val, vocab, out.index, false, data.num_classes,
                                    splits.val_heads.empty() ? nullptr : &splits.val_heads, e);
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StructuralError("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw StructuralError("short write to '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path);
}

void cmd_masks(const RunConfig& config, const fs::path& out, std::ostream& log) {
  const train::MaskSpec spec = parse_mask_spec(config.masks.pattern, config.train.seed);
  const auto masks = split_masks(config, config.masks.split, spec);
  const bool binary = config.masks.format == "binary";

  // Build the whole directory aside, then swap it in.
  const fs::path final_dir = out / "masks";
  const fs::path staging = out / ".masks.partial";
  fs::remove_all(staging);
  fs::create_directories(staging);
  std::ostringstream summary;
  summary << "index,n,nnz,sparsity,pattern,floor_applied,similarity_fallback\n";
  try {
    for (std::size_t k = 0; k < masks.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "%06zu.%s", k, binary ? "bin" : "json");
      const auto& m = masks[k];
      if (binary) {
        const auto bytes = mask_to_binary(m);
        write_file_atomic(staging / name,
                          std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
      } else {
        write_file_atomic(staging / name, mask_to_json(m).dump() + "\n");
      }
      summary << k << ',' << m.n() << ',' << m.nnz() << ',' << fmt(m.sparsity()) << ','
              << m.pattern().label() << ',' << (m.pattern().floor_applied ? 1 : 0) << ','
              << (m.pattern().similarity_fallback ? 1 : 0) << '\n';
    }
  } catch (...) {
    fs::remove_all(staging);
    throw;
  }
  fs::remove_all(final_dir);
  fs::rename(staging, final_dir);
  write_file_atomic(out / "masks_summary.csv", summary.str());
  log << "wrote " << masks.size() << " masks to " << final_dir.string() << '\n';
}

void cmd_stats(const RunConfig& config, const std::vector<std::string>& inputs,
               const fs::path& out, std::ostream& log) {
  std::vector<AttnMask> masks;
  std::vector<std::string> files = inputs.empty() ? config.stats.inputs : inputs;
  for (const auto& f : files) masks.push_back(load_mask_file(f));
  for (const auto& label : config.stats.patterns) {
    auto more = split_masks(config, config.stats.split, parse_mask_spec(label, config.train.seed));
    std::move(more.begin(), more.end(), std::back_inserter(masks));
  }
  if (masks.empty()) throw UsageError("stats needs mask files or stats.patterns");
  const std::string rows = stats_csv(masks);
  const std::string summary = summary_csv(masks);
  write_file_atomic(out / "stats.csv", rows);
  write_file_atomic(out / "stats_summary.csv", summary);
  log << "wrote stats for " << masks.size() << " masks\n";
}

void cmd_train(const RunConfig& config, const fs::path& out, std::ostream& log) {
  const Splits splits = load_splits(config.data);
  if (splits.val.empty()) throw StructuralError("training needs a validation split");
  const EncodedSplits enc = encode_splits(config.data, splits);
  nn::EncoderConfig model = config.model;
  model.vocab_size = enc.index.size();
  const bool learned = config.mode == "learned";

  const train::TrainResult result =
      learned ? train::train_learned(model, config.train, enc.train, enc.val)
              : train::train_fixed(model, config.train, config.plan, enc.train, enc.val);
  const std::string key =
      train::run_key(model, config.train, learned ? nullptr : &config.plan) + data_hash_text(config);
  const std::string hash = train::config_hash(key);

  std::ostringstream csv;
  const auto rows = train::trajectory_rows(result.trajectory, hash);
  train::write_trajectory_csv(csv, rows);
  std::ostringstream ckpt;
  nn::write_checkpoint(ckpt, result.params, result.degrees ? &*result.degrees : nullptr);

  const auto& last = result.trajectory.epochs.back();
  json manifest{{"config_hash", hash},
                {"mode", config.mode},
                {"config", config.raw},
                {"model", model},
                {"train", config.train},
                {"seeds", {{"data", config.data.seed}, {"train", config.train.seed}}},
                {"final", {{"val_accuracy", last.val_accuracy}, {"sparsity", last.model_sparsity}}},
                {"outputs", {"trajectory.csv", "checkpoint.bin"}}};
  if (!learned) {
    manifest["plan"] = config.plan;
    manifest["seeds"]["mask"] = config.plan.mask.seed;
  }
  write_file_atomic(out / "trajectory.csv", csv.str());
  write_file_atomic(out / "checkpoint.bin", ckpt.str());
  write_file_atomic(out / "manifest.json", manifest.dump(2) + "\n");
  log << "final val accuracy " << fmt(last.val_accuracy) << ", sparsity "
      << fmt(last.model_sparsity) << '\n';
}

void cmd_sweep(const RunConfig& config, const fs::path& out, std::ostream& log) {
  const Splits splits = load_splits(config.data);
  if (splits.val.empty()) throw StructuralError("sweeps need a validation split");
  const EncodedSplits enc = encode_splits(config.data, splits);
  nn::EncoderConfig model = config.model;
  model.vocab_size = enc.index.size();
  const std::string data_text = data_hash_text(config);

  std::ostringstream csv, index;
  csv << train::kTrajectoryHeader << '\n';
  std::size_t runs = 0;
  if (config.sweep.mode == "learned") {
    if (config.sweep.lambdas.empty() || config.sweep.init_sparsities.empty()) {
      throw UsageError("learned sweeps need sweep.lambdas and sweep.init_sparsities");
    }
    train::LearnedGrid grid{config.sweep.lambdas, config.sweep.init_sparsities, config.sweep.seeds};
    const auto rows =
        train::sweep_learned(model, config.train, grid, enc.train, enc.val, config.sweep.threads);
    index << "config_hash,lambda,init_sparsity,seed,final_accuracy,final_sparsity\n";
    for (const auto& r : rows) {
      const auto hash = train::config_hash(train::run_key(model, r.config, nullptr) + data_text);
      train::write_trajectory_csv(csv, train::trajectory_rows(r.trajectory, hash), false);
      index << hash << ',' << fmt(r.config.lambda) << ',' << fmt(r.config.init_sparsity) << ','
            << r.config.seed << ',' << fmt(r.accuracy) << ',' << fmt(r.sparsity) << '\n';
    }
    runs = rows.size();
  } else {
    if (config.sweep.patterns.empty()) throw UsageError("fixed sweeps need sweep.patterns");
    train::SweepGrid grid;
    for (const auto& p : config.sweep.patterns) grid.masks.push_back(parse_mask_spec(p, 0));
    grid.directions = config.sweep.directions;
    grid.pivots = config.sweep.pivots;
    grid.seeds = config.sweep.seeds;
    const auto rows =
        train::sweep_fixed(model, config.train, grid, enc.train, enc.val, config.sweep.threads);
    index << "config_hash,pattern,direction,pivot,seed,final_accuracy,final_sparsity\n";
    for (const auto& r : rows) {
      train::TrainConfig cfg = config.train;
      cfg.seed = r.entry.seed;
      const auto hash = train::config_hash(train::run_key(model, cfg, &r.entry.plan) + data_text);
      train::write_trajectory_csv(csv, train::trajectory_rows(r.trajectory, hash), false);
      index << hash << ',' << r.entry.plan.mask.label() << ',' << to_string(r.entry.plan.direction)
            << ',' << r.entry.plan.pivot << ',' << r.entry.seed << ',' << fmt(r.accuracy) << ','
            << fmt(r.sparsity) << '\n';
    }
    runs = rows.size();
  }
  write_file_atomic(out / "sweep.csv", csv.str());
  write_file_atomic(out / "sweep_index.csv", index.str());
  log << "finished " << runs << " runs\n";
}

void cmd_report(const RunConfig& config, const std::vector<std::string>& inputs,
                const fs::path& out, std::ostream& log) {
  const std::vector<std::string> files = inputs.empty() ? config.report.inputs : inputs;
  if (files.empty()) throw UsageError("report needs trajectory CSV inputs");
  std::vector<train::TrajectoryRow> rows;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw StructuralError("cannot read '" + f + "'");
    auto more = train::read_trajectory_csv(in);
    rows.insert(rows.end(), more.begin(), more.end());
  }
  const auto curve = train::rolling_curve(train::pooled_points(rows), config.report.curve);
  std::ostringstream csv;
  train::write_curve_csv(csv, curve);
  write_file_atomic(out / "curve.csv", csv.str());
  log << "wrote " << curve.size() << " curve points\n";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse attention pattern experiments", "sparselab"};
  app.require_subcommand(1);

  struct Common {
    std::string config;
    std::string out_dir;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> inputs;
  } common;

  auto add_common = [&](CLI::App* sub, bool positional_inputs) {
    sub->add_option("--config", common.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out_dir, "Output directory")->required();
    sub->add_option("--override", common.overrides, "Dotted KEY=VALUE override (repeatable)")
        ->take_all();
    sub->add_option("--seed", common.seed, "Sets train.seed");
    if (positional_inputs) sub->add_option("inputs", common.inputs, "Input files");
  };
  auto* masks = app.add_subcommand("masks", "Generate attention masks for a dataset split");
  auto* stats = app.add_subcommand("stats", "Graph statistics of masks");
  auto* train_cmd = app.add_subcommand("train", "Train one configuration");
  auto* sweep = app.add_subcommand("sweep", "Train a grid of configurations");
  auto* report = app.add_subcommand("report", "Aggregate trajectories into a curve");
  add_common(masks, false);
  add_common(stats, true);
  add_common(train_cmd, false);
  add_common(sweep, false);
  add_common(report, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    json raw = common.config.empty() ? json::object() : load_config_file(common.config);
    for (const auto& o : common.overrides) apply_override(raw, o);
    if (common.seed) apply_override(raw, "train.seed=" + std::to_string(*common.seed));
    const RunConfig config = parse_run_config(raw);
    const fs::path out_dir = common.out_dir;
    fs::create_directories(out_dir);
    if (masks->parsed()) cmd_masks(config, out_dir, err);
    if (stats->parsed()) cmd_stats(config, common.inputs, out_dir, err);
    if (train_cmd->parsed()) cmd_train(config, out_dir, err);
    if (sweep->parsed()) cmd_sweep(config, out_dir, err);
    if (report->parsed()) cmd_report(config, common.inputs, out_dir, err);
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace sparselab::cli
