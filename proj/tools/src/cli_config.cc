// Copyright 2026 The MedLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli_config.h"

#include <fstream>
#include <sstream>

#include "medlens/error.h"

namespace medlens::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

Json forest_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"max_depth", p.max_depth},
          {"min_leaf", p.min_leaf},
          {"mtry", std::string(to_string(p.mtry_rule))},
          {"bootstrap", p.bootstrap}};
}

std::string missingness_name(synth::Missingness m) {
  return m == synth::Missingness::kMcar ? "mcar" : "blocky";
}

Json settings_json(const CliConfig& c) {
  const auto& p = c.pipeline;
  const auto& s = c.synth;
  Json j;
  j["seed"] = c.seed;
  j["paths"] = {{"events", c.paths.events.string()},
                {"admissions", c.paths.admissions.string()},
                {"truth", c.paths.truth.string()},
                {"model", c.paths.model.string()}};
  j["schema"]["events"] = {{"admission_id", c.events.admission_id},
                           {"sign_id", c.events.sign_id},
                           {"charttime", c.events.charttime},
                           {"value", c.events.value},
                           {"delimiter", std::string(1, c.events.delimiter)},
                           {"time_format", c.events.time_format},
                           {"epoch", c.events.epoch}};
  j["schema"]["admissions"] = {
      {"admission_id", c.admissions.admission_id},
      {"discharge_time", c.admissions.discharge_time},
      {"expire_flag", c.admissions.expire_flag},
      {"delimiter", std::string(1, c.admissions.delimiter)},
      {"time_format", c.admissions.time_format},
      {"epoch", c.admissions.epoch}};
  j["pipeline"] = {
      {"hours", p.hours},
      {"window", p.window},
      {"k_freq", p.k_freq},
      {"k_corr", p.k_corr},
      {"test_fraction", p.test_fraction},
      {"sample_limit",
       p.sample_limit ? Json(*p.sample_limit) : Json(nullptr)},
      {"stratify", p.stratify},
      {"variation", std::string(to_string(p.variation))},
      {"interp_max_train", p.interp_max_train},
      {"compare_classifiers", c.compare_classifiers},
      {"classifier", forest_json(p.classifier)},
      {"interpolator", forest_json(p.interpolator)}};
  j["synth"] = {{"n_admissions", s.n_admissions},
                {"n_signs", s.n_signs},
                {"n_informative", s.n_informative},
                {"hours", s.hours},
                {"rates", s.rates},
                {"label_noise", s.label_noise},
                {"prevalence", s.prevalence},
                {"label_sharpness", s.label_sharpness},
                {"step_sd", s.step_sd},
                {"bound", s.bound},
                {"smoothing", s.smoothing},
                {"noise_sd", s.noise_sd},
                {"missingness", missingness_name(s.missingness)},
                {"gap_length", s.gap_length}};
  j["measure"] = {{"histogram_bin_width", c.histogram_bin_width}};
  j["interp_eval"] = {{"sample_series", c.sample_series}};
  return j;
}

// Keys whose value may change JSON type (null / scalar / array).
bool flexible(const std::string& path) {
  return path == "pipeline.sample_limit" || path == "synth.rates";
}

void merge(Json& dst, const Json& src, const std::string& prefix) {
  if (!src.is_object()) {
    throw UsageError("config " + (prefix.empty() ? std::string("root")
                                                 : "'" + prefix + "'") +
                     " must be an object");
  }
  for (const auto& [key, value] : src.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!dst.contains(key)) throw UsageError("unknown config key '" + path + "'");
    auto& slot = dst[key];
    if (slot.is_object()) {
      merge(slot, value, path);
    } else if (!flexible(path) && !value.is_null() &&
               slot.type() != value.type() &&
               !(slot.is_number() && value.is_number())) {
      throw UsageError("config key '" + path + "' has the wrong type");
    } else {
      slot = value;
    }
  }
}

void apply_set(Json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw UsageError("unknown config key '" + key + "'");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) {
    throw UsageError("config key '" + key + "' is a section");
  }
  Json value;
  if (node->is_string()) {
    value = text;
  } else {
    value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
  }
  // Reuse the type rules of file merging.
  Json wrapper = Json::object();
  Json* w = &wrapper;
  start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (dot == std::string::npos) {
      (*w)[part] = value;
      break;
    }
    w = &(*w)[part];
    start = dot + 1;
  }
  merge(root, wrapper, "");
}

template <typename T>
T get(const Json& j, const std::string& path) {
  const Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    node = &node->at(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!node->is_number_unsigned() &&
          !(node->is_number_integer() && node->template get<long long>() >= 0)) {
        throw UsageError("config key '" + path +
                         "' must be a non-negative integer");
      }
    }
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!node->is_number_integer()) {
        throw UsageError("config key '" + path + "' must be an integer");
      }
    }
    return node->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError("config key '" + path + "' has the wrong type");
  }
}

char delimiter(const Json& j, const std::string& path) {
  const auto s = get<std::string>(j, path);
  if (s.size() != 1) {
    throw UsageError("config key '" + path + "' must be one character");
  }
  return s.front();
}

ForestParams forest_params(const Json& j, const std::string& path) {
  ForestParams p;
  p.n_trees = get<std::size_t>(j, path + ".n_trees");
  p.max_depth = get<std::size_t>(j, path + ".max_depth");
  p.min_leaf = get<std::size_t>(j, path + ".min_leaf");
  p.mtry_rule = parse_mtry_rule(get<std::string>(j, path + ".mtry"));
  p.bootstrap = get<bool>(j, path + ".bootstrap");
  return p;
}

CliConfig from_json(const Json& j) {
  CliConfig c;
  c.seed = get<std::uint64_t>(j, "seed");
  c.workers = get<int>(j, "workers");
  c.out = get<std::string>(j, "out");
  c.paths.events = get<std::string>(j, "paths.events");
  c.paths.admissions = get<std::string>(j, "paths.admissions");
  c.paths.truth = get<std::string>(j, "paths.truth");
  c.paths.model = get<std::string>(j, "paths.model");

  c.events.admission_id = get<std::string>(j, "schema.events.admission_id");
  c.events.sign_id = get<std::string>(j, "schema.events.sign_id");
  c.events.charttime = get<std::string>(j, "schema.events.charttime");
  c.events.value = get<std::string>(j, "schema.events.value");
  c.events.delimiter = delimiter(j, "schema.events.delimiter");
  c.events.time_format = get<std::string>(j, "schema.events.time_format");
  c.events.epoch = get<std::string>(j, "schema.events.epoch");
  c.admissions.admission_id =
      get<std::string>(j, "schema.admissions.admission_id");
  c.admissions.discharge_time =
      get<std::string>(j, "schema.admissions.discharge_time");
  c.admissions.expire_flag = get<std::string>(j, "schema.admissions.expire_flag");
  c.admissions.delimiter = delimiter(j, "schema.admissions.delimiter");
  c.admissions.time_format =
      get<std::string>(j, "schema.admissions.time_format");
  c.admissions.epoch = get<std::string>(j, "schema.admissions.epoch");

  auto& p = c.pipeline;
  p.hours = get<std::size_t>(j, "pipeline.hours");
  p.window = get<std::size_t>(j, "pipeline.window");
  p.k_freq = get<std::size_t>(j, "pipeline.k_freq");
  p.k_corr = get<std::size_t>(j, "pipeline.k_corr");
  p.test_fraction = get<double>(j, "pipeline.test_fraction");
  if (j.at("pipeline").at("sample_limit").is_null()) {
    p.sample_limit.reset();
  } else {
    p.sample_limit = get<std::size_t>(j, "pipeline.sample_limit");
  }
  p.stratify = get<bool>(j, "pipeline.stratify");
  p.variation = parse_variation(get<std::string>(j, "pipeline.variation"));
  p.interp_max_train = get<std::size_t>(j, "pipeline.interp_max_train");
  c.compare_classifiers = get<bool>(j, "pipeline.compare_classifiers");
  p.classifier = forest_params(j, "pipeline.classifier");
  p.interpolator = forest_params(j, "pipeline.interpolator");

  auto& s = c.synth;
  s.n_admissions = get<std::size_t>(j, "synth.n_admissions");
  s.n_signs = get<std::size_t>(j, "synth.n_signs");
  s.n_informative = get<std::size_t>(j, "synth.n_informative");
  s.hours = get<std::size_t>(j, "synth.hours");
  const auto& rates = j.at("synth").at("rates");
  if (rates.is_number()) {
    s.rates = {get<double>(j, "synth.rates")};
  } else {
    try {
      s.rates = rates.get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw UsageError("config key 'synth.rates' must be a number or a list");
    }
  }
  s.label_noise = get<double>(j, "synth.label_noise");
  s.prevalence = get<double>(j, "synth.prevalence");
  s.label_sharpness = get<double>(j, "synth.label_sharpness");
  s.step_sd = get<double>(j, "synth.step_sd");
  s.bound = get<double>(j, "synth.bound");
  s.smoothing = get<std::size_t>(j, "synth.smoothing");
  s.noise_sd = get<double>(j, "synth.noise_sd");
  const auto missing = get<std::string>(j, "synth.missingness");
  if (missing == "mcar") {
    s.missingness = synth::Missingness::kMcar;
  } else if (missing == "blocky") {
    s.missingness = synth::Missingness::kBlocky;
  } else {
    throw UsageError("synth.missingness must be 'mcar' or 'blocky'");
  }
  s.gap_length = get<double>(j, "synth.gap_length");
  c.histogram_bin_width = get<double>(j, "measure.histogram_bin_width");
  c.sample_series = get<std::size_t>(j, "interp_eval.sample_series");
  return c;
}

}  // namespace

nlohmann::ordered_json default_json() {
  const CliConfig defaults;
  Json j = settings_json(defaults);
  Json out;
  out["seed"] = j["seed"];
  out["workers"] = defaults.workers;
  out["out"] = defaults.out.string();
  for (const auto& [key, value] : j.items()) {
    if (key != "seed") out[key] = value;
  }
  return out;
}

nlohmann::ordered_json snapshot(const CliConfig& config) {
  return settings_json(config);
}

CliConfig load_config(const std::optional<fs::path>& file,
                      const std::vector<std::string>& sets,
                      const FlagOverrides& flags) {
  Json root = default_json();
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw UsageError("cannot read config '" + file->string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    Json parsed = Json::parse(buf.str(), nullptr, false);
    if (parsed.is_discarded()) {
      throw UsageError("config '" + file->string() + "' is not valid JSON");
    }
    merge(root, parsed, "");
  }
  for (const auto& s : sets) apply_set(root, s);

  CliConfig c = from_json(root);
  if (flags.seed) c.seed = *flags.seed;
  if (flags.workers) c.workers = *flags.workers;
  if (flags.out) c.out = *flags.out;
  c.force = flags.force;
  if (flags.data_dir) {
    c.paths.events = *flags.data_dir / "events.csv";
    c.paths.admissions = *flags.data_dir / "admissions.csv";
    c.paths.truth = *flags.data_dir / "truth.csv";
  }
  if (c.workers < 1) throw UsageError("workers must be >= 1");
  c.pipeline.seed = c.seed;
  c.synth.seed = c.seed;
  return c;
}

}  // namespace medlens::cli
