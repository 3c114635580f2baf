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

// Command configuration. A JSON file may set any documented key; unknown
// keys are rejected. Overrides of the form `a.b.c=value` apply on top of
// the file, and the dedicated flags (--seed, --workers, --out, --force)
// apply last.

#ifndef MEDLENS_TOOLS_CLI_CONFIG_H_
#define MEDLENS_TOOLS_CLI_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "medlens/ingest.h"
#include "medlens/model.h"
#include "medlens/synth.h"

namespace medlens::cli {

struct Paths {
  std::filesystem::path events;
  std::filesystem::path admissions;
  std::filesystem::path truth;
  std::filesystem::path model;
};

struct CliConfig {
  // The single root seed; copied into the pipeline and synth settings.
  std::uint64_t seed = 0;
  int workers = 1;
  std::filesystem::path out = "medlens-out";
  bool force = false;

  Paths paths;
  ingest::EventFileSchema events;
  ingest::AdmissionFileSchema admissions;
  PipelineConfig pipeline;
  bool compare_classifiers = false;
  synth::SynthSpec synth;
  double histogram_bin_width = 0.1;
  std::size_t sample_series = 20;
};

// Every key with its default value.
nlohmann::ordered_json default_json();

// Reproducible settings only: no workers, output directory or --force.
nlohmann::ordered_json snapshot(const CliConfig& config);

struct FlagOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::filesystem::path> out;
  bool force = false;
  // Shorthand for paths.{events,admissions,truth} under one directory.
  std::optional<std::filesystem::path> data_dir;
};

// Throws UsageError on unreadable files, unknown keys, or bad values.
CliConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::string>& sets,
                      const FlagOverrides& flags);

}  // namespace medlens::cli

#endif  // MEDLENS_TOOLS_CLI_CONFIG_H_
