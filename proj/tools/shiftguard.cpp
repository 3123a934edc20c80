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

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "shiftguard/bench/acceptance.hpp"
#include "shiftguard/experiments/commands.hpp"

namespace ex = shiftguard::experiments;
namespace bench = shiftguard::bench;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::size_t jobs = 1;
  std::string out = ".";

  ex::RunOptions options() const {
    ex::RunOptions o;
    o.seed = seed;
    o.trials = trials;
    o.jobs = jobs;
    o.out_dir = out;
    return o;
  }
};

void add_run_flags(CLI::App* sub, CommonFlags& flags, bool config_required) {
  auto* config = sub->add_option("--config", flags.config, "Scenario JSON file");
  if (config_required) config->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", flags.seed, "Override the base seed");
  sub->add_option("--trials", flags.trials, "Override the trial count")->check(CLI::PositiveNumber);
  sub->add_option("--jobs", flags.jobs, "Concurrent trials")->check(CLI::PositiveNumber);
  sub->add_option("--out", flags.out, "Output directory");
}

int run_bench(const std::string& suite, bool list, const CommonFlags& flags) {
  if (list) {
    for (const auto& name : bench::suite_names()) std::cout << name << '\n';
    return 0;
  }
  if (suite.empty()) {
    std::cerr << "error: bench needs a suite name (see --list)\n";
    return 2;
  }
  const auto names = bench::suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    std::cerr << "error: unknown suite '" << suite << "'\n";
    return 2;
  }
  const bench::SuiteOutcome outcome = bench::run_suite(suite, std::cout);
  if (flags.out != ".") {
    std::filesystem::create_directories(flags.out);
    std::ofstream(std::filesystem::path(flags.out) / "bench_report.json") << outcome.report.dump(2) << '\n';
  }
  std::cout << (outcome.all_passed ? "all criteria passed" : "some criteria failed") << '\n';
  return outcome.all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  ex::configure_logging();
  CLI::App app{"Spectral outlier removal and learning under distribution shift"};
  app.require_subcommand(1);

  CommonFlags flags;
  struct Entry {
    const char* name;
    const char* help;
    ex::Command command;
  };
  const Entry entries[] = {
      {"filter", "Run the outlier-removal filter", ex::Command::Filter},
      {"pq", "Run a PQ learner", ex::Command::Pq},
      {"tds", "Run the tolerant TDS learner", ex::Command::Tds},
      {"testable", "Run the tolerant testable learner", ex::Command::Testable},
      {"nasty", "Run the nasty-noise learner", ex::Command::Nasty},
  };
  std::optional<ex::Command> chosen;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    add_run_flags(sub, flags, true);
    sub->callback([&chosen, command = e.command] { chosen = command; });
  }

  std::string suite;
  bool list = false;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark suite");
  bench_cmd->add_option("suite", suite, "Suite name");
  bench_cmd->add_flag("--list", list, "List suite names");
  bench_cmd->add_option("--out", flags.out, "Output directory for bench_report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (chosen) return ex::execute_command(*chosen, flags.config, flags.options(), std::cerr);
    return run_bench(suite, list, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
