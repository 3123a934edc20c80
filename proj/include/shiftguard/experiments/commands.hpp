// Copyright 2026 The ShiftGuard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace shiftguard::experiments {

using nlohmann::json;

enum class Command { Filter, Pq, Tds, Testable, Nasty };
std::string_view to_string(Command command);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::size_t jobs = 1;
  std::filesystem::path out_dir = ".";
};

struct TrialRecord {
  std::size_t index = 0;
  bool ok = true;
  std::string error;
  /// Flat object of finite numbers plus string labels.
  json metrics = json::object();
  /// Rows (round, mu, tau, removed) for the filter command.
  std::vector<std::array<double, 4>> series;
};

struct CommandResult {
  json report;
  std::string series_csv;
  std::size_t failures = 0;
  int exit_code = 0;
};

/// Runs every trial of `config` and assembles the report. Trials may run on
/// up to options.jobs threads; the report depends only on config and seed.
CommandResult run_command(Command command, const json& config, const RunOptions& options);

/// Reads the config file, runs the command and writes report.json (and
/// series.csv for the filter command) under options.out_dir. Returns the
/// process exit code; diagnostics go to `err`.
int execute_command(Command command, const std::filesystem::path& config_path, const RunOptions& options,
                    std::ostream& err);

/// Mean, population std, min, quartiles and max of each numeric metric
/// across successful trials.
json aggregate(const std::vector<TrialRecord>& records);

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> sorted_values, double q);

/// Applies SHIFTGUARD_LOG (trace, debug, info, warn, error, off).
void configure_logging();

}  // namespace shiftguard::experiments
