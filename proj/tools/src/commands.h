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

#ifndef MEDLENS_TOOLS_COMMANDS_H_
#define MEDLENS_TOOLS_COMMANDS_H_

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cli_config.h"

namespace medlens::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

// Each command writes into config.out and a manifest.json alongside its
// outputs. They throw the medlens error types; run_cli maps them to codes.
void cmd_synth(const CliConfig& config, std::ostream& log);
void cmd_measure(const CliConfig& config, std::ostream& log);
void cmd_interp_eval(const CliConfig& config, std::ostream& log);
void cmd_run(const CliConfig& config, std::ostream& log);
void cmd_predict(const CliConfig& config, std::ostream& log);

// Hex SHA-256 of a file's bytes. Throws DataError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

// Full command line: parses argv, dispatches, prints errors to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace medlens::cli

#endif  // MEDLENS_TOOLS_COMMANDS_H_
