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

#include "sparselab/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "sparselab/error.hpp"

namespace sparselab::cli {

using nlohmann::json;

namespace {

enum class Kind { kInt, kUInt, kNumber, kString, kBool, kStrings, kInts, kUInts, kNumbers };

using Section = std::map<std::string, Kind, std::less<>>;

const std::map<std::string, Section, std::less<>>& schema() {
  static const std::map<std::string, Section, std::less<>> s = {
      {"data",
       {{"source", Kind::kString},
        {"task", Kind::kString},
        {"train_size", Kind::kUInt},
        {"val_size", Kind::kUInt},
        {"length", Kind::kUInt},
        {"alphabet", Kind::kUInt},
        {"seed", Kind::kUInt},
        {"train", Kind::kString},
        {"val", Kind::kString},
        {"vocab", Kind::kString},
        {"train_trees", Kind::kString},
        {"val_trees", Kind::kString},
        {"embeddings", Kind::kString},
        {"num_classes", Kind::kUInt}}},
      {"model",
       {{"preset", Kind::kString},
        {"num_layers", Kind::kUInt},
        {"num_heads", Kind::kUInt},
        {"d_model", Kind::kUInt},
        {"d_ff", Kind::kUInt},
        {"max_len", Kind::kUInt},
        {"dropout", Kind::kNumber},
        {"init", Kind::kString}}},
      {"train",
       {{"preset", Kind::kString},
        {"mode", Kind::kString},
        {"epochs", Kind::kUInt},
        {"batch_size", Kind::kUInt},
        {"learning_rate", Kind::kNumber},
        {"warmup_ratio", Kind::kNumber},
        {"seed", Kind::kUInt},
        {"lambda", Kind::kNumber},
        {"init_sparsity", Kind::kNumber},
        {"temperature", Kind::kNumber}}},
      {"plan", {{"pattern", Kind::kString}, {"direction", Kind::kString}, {"pivot", Kind::kUInt}}},
      {"masks", {{"pattern", Kind::kString}, {"format", Kind::kString}, {"split", Kind::kString}}},
      {"stats", {{"inputs", Kind::kStrings}, {"patterns", Kind::kStrings}, {"split", Kind::kString}}},
      {"sweep",
       {{"mode", Kind::kString},
        {"patterns", Kind::kStrings},
        {"directions", Kind::kStrings},
        {"pivots", Kind::kUInts},
        {"seeds", Kind::kUInts},
        {"lambdas", Kind::kNumbers},
        {"init_sparsities", Kind::kNumbers},
        {"threads", Kind::kUInt}}},
      {"report", {{"inputs", Kind::kStrings}, {"window", Kind::kUInt}, {"outlier_sd", Kind::kNumber}}},
  };
  return s;
}

bool matches(const json& v, Kind kind) {
  auto all = [&](auto pred) {
    if (!v.is_array()) return false;
    for (const auto& e : v) {
      if (!pred(e)) return false;
    }
    return true;
  };
  switch (kind) {
    case Kind::kInt: return v.is_number_integer();
    case Kind::kUInt: return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    case Kind::kNumber: return v.is_number();
    case Kind::kString: return v.is_string();
    case Kind::kBool: return v.is_boolean();
    case Kind::kStrings: return all([](const json& e) { return e.is_string(); });
    case Kind::kInts: return all([](const json& e) { return e.is_number_integer(); });
    case Kind::kUInts:
      return all([](const json& e) {
        return e.is_number_unsigned() || (e.is_number_integer() && e.get<long long>() >= 0);
      });
    case Kind::kNumbers: return all([](const json& e) { return e.is_number(); });
  }
  return false;
}

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::kInt: return "an integer";
    case Kind::kUInt: return "a non-negative integer";
    case Kind::kNumber: return "a number";
    case Kind::kString: return "a string";
    case Kind::kBool: return "a boolean";
    case Kind::kStrings: return "an array of strings";
    case Kind::kInts: return "an array of integers";
    case Kind::kUInts: return "an array of non-negative integers";
    case Kind::kNumbers: return "an array of numbers";
  }
  return "?";
}

void one_of(const json& section, const char* key, std::initializer_list<std::string_view> allowed,
            const std::string& where) {
  if (!section.contains(key)) return;
  const auto v = section[key].get<std::string>();
  for (auto a : allowed) {
    if (v == a) return;
  }
  throw UsageError(where + "." + key + ": unsupported value '" + v + "'");
}

template <typename T>
T get_or(const json& section, const char* key, T fallback) {
  return section.contains(key) ? section[key].get<T>() : fallback;
}

PlanDirection direction_or_throw(const std::string& name) {
  auto d = parse_plan_direction(name);
  if (!d) throw UsageError("unknown layer-plan direction '" + name + "'");
  return *d;
}

}  // namespace

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void apply_override(json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw UsageError("override '" + std::string(assignment) + "' is not KEY=VALUE");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw UsageError("override key '" + key + "' has an empty component");
    if (!node->is_object()) {
      if (!node->is_null()) throw UsageError("override key '" + key + "' crosses a non-object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

void validate_config(const json& config) {
  if (!config.is_object()) throw UsageError("config must be a JSON object");
  const auto& s = schema();
  for (const auto& [name, section] : config.items()) {
    auto it = s.find(name);
    if (it == s.end()) throw UsageError("unknown config section '" + name + "'");
    if (!section.is_object()) throw UsageError("config section '" + name + "' must be an object");
    for (const auto& [key, value] : section.items()) {
      auto k = it->second.find(key);
      if (k == it->second.end()) throw UsageError("unknown key '" + name + "." + key + "'");
      if (!matches(value, k->second)) {
        throw UsageError(name + "." + key + " must be " + std::string(kind_name(k->second)));
      }
    }
  }
  const json empty = json::object();
  auto section = [&](const char* name) -> const json& {
    return config.contains(name) ? config[name] : empty;
  };
  one_of(section("data"), "source", {"synthetic", "files"}, "data");
  one_of(section("data"), "task", {"ADJ_DUP", "FIRST_MATCH"}, "data");
  one_of(section("model"), "preset", {"desk", "large"}, "model");
  one_of(section("model"), "init", {"glorot", "uniform"}, "model");
  one_of(section("train"), "preset", {"desk", "large"}, "train");
  one_of(section("train"), "mode", {"fixed", "learned"}, "train");
  one_of(section("plan"), "direction", {"TOP_DOWN", "BOTTOM_UP", "ALL_BUT_LAST"}, "plan");
  one_of(section("masks"), "format", {"json", "binary"}, "masks");
  one_of(section("masks"), "split", {"train", "val"}, "masks");
  one_of(section("stats"), "split", {"train", "val"}, "stats");
  one_of(section("sweep"), "mode", {"fixed", "learned"}, "sweep");
  if (section("sweep").contains("directions")) {
    for (const auto& d : section("sweep")["directions"]) direction_or_throw(d.get<std::string>());
  }
  auto check_pattern = [](const json& v, const std::string& where) {
    try {
      parse_mask_spec(v.get<std::string>(), 0);
    } catch (const StructuralError& e) {
      throw UsageError(where + ": " + e.what());
    }
  };
  if (section("plan").contains("pattern")) check_pattern(section("plan")["pattern"], "plan.pattern");
  if (section("masks").contains("pattern")) check_pattern(section("masks")["pattern"], "masks.pattern");
  for (const char* name : {"stats", "sweep"}) {
    if (section(name).contains("patterns")) {
      for (const auto& p : section(name)["patterns"]) check_pattern(p, std::string(name) + ".patterns");
    }
  }
}

train::MaskSpec parse_mask_spec(std::string_view label, std::uint64_t seed) {
  std::string text(label);
  const auto open = text.find('(');
  const std::string name = text.substr(0, open);
  const auto args = open == std::string::npos
                        ? std::size_t{0}
                        : static_cast<std::size_t>(std::count(text.begin(), text.end(), ',')) + 1;
  if (name == "RANDOM" && open == std::string::npos) {
    text += "(" + std::to_string(seed) + ")";
  } else if (name == "BIGBIRD" && args == 3 && text.back() == ')') {
    text.insert(text.size() - 1, "," + std::to_string(seed));
  }
  const Pattern p = parse_pattern_label(text);
  train::MaskSpec spec;
  spec.kind = p.kind;
  spec.window = p.kind == PatternKind::kNeighbour || p.kind == PatternKind::kBigBird ? p.window : 1;
  spec.global = p.global;
  spec.random = p.random;
  spec.seed = p.seed;
  if (p.kind == PatternKind::kNeighbour && p.window < 1) {
    throw StructuralError("NEIGHBOUR window must be >= 1");
  }
  return spec;
}

RunConfig parse_run_config(const json& config) {
  validate_config(config);
  RunConfig rc;
  rc.raw = config;
  const json empty = json::object();
  auto section = [&](const char* name) -> const json& {
    return config.contains(name) ? config[name] : empty;
  };

  const json& d = section("data");
  rc.data.source = get_or<std::string>(d, "source", rc.data.source);
  if (d.contains("task")) rc.data.task = *parse_synth_kind(d["task"].get<std::string>());
  rc.data.train_size = get_or<std::size_t>(d, "train_size", rc.data.train_size);
  rc.data.val_size = get_or<std::size_t>(d, "val_size", rc.data.val_size);
  rc.data.length = get_or<std::size_t>(d, "length", rc.data.length);
  rc.data.alphabet = get_or<std::size_t>(d, "alphabet", rc.data.alphabet);
  rc.data.seed = get_or<std::uint64_t>(d, "seed", rc.data.seed);
  rc.data.num_classes = get_or<int>(d, "num_classes", rc.data.num_classes);
  auto path = [&](const char* key, std::optional<std::filesystem::path>& out) {
    if (d.contains(key)) out = d[key].get<std::string>();
  };
  path("train", rc.data.train);
  path("val", rc.data.val);
  path("vocab", rc.data.vocab);
  path("train_trees", rc.data.train_trees);
  path("val_trees", rc.data.val_trees);
  path("embeddings", rc.data.embeddings);
  if (rc.data.source == "files" && !rc.data.train) {
    throw UsageError("data.train is required when data.source is 'files'");
  }
  if (rc.data.num_classes < 2) throw UsageError("data.num_classes must be >= 2");
  if (rc.data.alphabet < 2) throw UsageError("data.alphabet must be >= 2");

  const json& m = section("model");
  if (get_or<std::string>(m, "preset", "desk") == "large") rc.model = nn::EncoderConfig::large();
  rc.model.num_layers = get_or<int>(m, "num_layers", rc.model.num_layers);
  rc.model.num_heads = get_or<int>(m, "num_heads", rc.model.num_heads);
  rc.model.d_model = get_or<int>(m, "d_model", rc.model.d_model);
  rc.model.d_ff = get_or<int>(m, "d_ff", rc.model.d_ff);
  rc.model.max_len = get_or<int>(m, "max_len", rc.model.max_len);
  rc.model.dropout = get_or<double>(m, "dropout", rc.model.dropout);
  if (m.contains("init")) rc.model.init = *nn::parse_init_scheme(m["init"].get<std::string>());
  rc.model.num_classes = rc.data.num_classes;

  const json& t = section("train");
  if (get_or<std::string>(t, "preset", "desk") == "large") rc.train = train::TrainConfig::large();
  rc.mode = get_or<std::string>(t, "mode", rc.mode);
  rc.train.epochs = get_or<int>(t, "epochs", rc.train.epochs);
  rc.train.batch_size = get_or<int>(t, "batch_size", rc.train.batch_size);
  rc.train.learning_rate = get_or<double>(t, "learning_rate", rc.train.learning_rate);
  rc.train.warmup_ratio = get_or<double>(t, "warmup_ratio", rc.train.warmup_ratio);
  rc.train.seed = get_or<std::uint64_t>(t, "seed", rc.train.seed);
  rc.train.lambda = get_or<double>(t, "lambda", rc.train.lambda);
  rc.train.init_sparsity = get_or<double>(t, "init_sparsity", rc.train.init_sparsity);
  rc.train.temperature = get_or<double>(t, "temperature", rc.train.temperature);
  try {
    rc.train.validate();
  } catch (const StructuralError& e) {
    throw UsageError(std::string("train: ") + e.what());
  }

  const json& p = section("plan");
  rc.plan_pattern = get_or<std::string>(p, "pattern", rc.plan_pattern);
  rc.plan.mask = parse_mask_spec(rc.plan_pattern, rc.train.seed);
  rc.plan.direction = direction_or_throw(get_or<std::string>(p, "direction", "ALL_BUT_LAST"));
  rc.plan.pivot = get_or<int>(p, "pivot", rc.plan.pivot);

  const json& mk = section("masks");
  rc.masks.pattern = get_or<std::string>(mk, "pattern", rc.masks.pattern);
  rc.masks.format = get_or<std::string>(mk, "format", rc.masks.format);
  rc.masks.split = get_or<std::string>(mk, "split", rc.masks.split);

  const json& st = section("stats");
  rc.stats.inputs = get_or<std::vector<std::string>>(st, "inputs", {});
  rc.stats.patterns = get_or<std::vector<std::string>>(st, "patterns", {});
  rc.stats.split = get_or<std::string>(st, "split", rc.stats.split);

  const json& sw = section("sweep");
  rc.sweep.mode = get_or<std::string>(sw, "mode", rc.sweep.mode);
  rc.sweep.patterns = get_or<std::vector<std::string>>(sw, "patterns", {});
  if (sw.contains("directions")) {
    rc.sweep.directions.clear();
    for (const auto& dn : sw["directions"]) rc.sweep.directions.push_back(direction_or_throw(dn));
  }
  if (sw.contains("pivots")) rc.sweep.pivots = sw["pivots"].get<std::vector<int>>();
  if (sw.contains("seeds")) rc.sweep.seeds = sw["seeds"].get<std::vector<std::uint64_t>>();
  rc.sweep.lambdas = get_or<std::vector<double>>(sw, "lambdas", {});
  rc.sweep.init_sparsities = get_or<std::vector<double>>(sw, "init_sparsities", {});
  rc.sweep.threads = get_or<unsigned>(sw, "threads", 0u);

  const json& r = section("report");
  rc.report.inputs = get_or<std::vector<std::string>>(r, "inputs", {});
  rc.report.curve.window = get_or<std::size_t>(r, "window", rc.report.curve.window);
  rc.report.curve.outlier_sd = get_or<double>(r, "outlier_sd", rc.report.curve.outlier_sd);
  if (rc.report.curve.window == 0) throw UsageError("report.window must be positive");
  return rc;
}

}  // namespace sparselab::cli
