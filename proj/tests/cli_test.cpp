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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shiftguard/experiments/commands.hpp"
#include "shiftguard/experiments/scenario.hpp"

namespace shiftguard::experiments {
namespace {

namespace fs = std::filesystem;

fs::path config_dir() { return fs::path(SHIFTGUARD_SOURCE_DIR) / "configs"; }

json load(const std::string& name) {
  std::ifstream in(config_dir() / name);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void expect_finite_numbers(const json& j) {
  if (j.is_number()) {
    EXPECT_TRUE(std::isfinite(j.get<double>()));
  } else if (j.is_structured()) {
    for (const auto& v : j) expect_finite_numbers(v);
  }
}

RunOptions quick(std::size_t trials = 2) {
  RunOptions o;
  o.trials = trials;
  return o;
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_EQ(quantile({}, 0.5), 0.0);
  EXPECT_EQ(quantile({3.0, 1.0, 2.0}, 0.5), 2.0);
  EXPECT_EQ(quantile({1.0, 2.0, 3.0, 4.0}, 0.25), 1.75);
  EXPECT_EQ(quantile({1.0, 2.0, 3.0, 4.0}, 1.0), 4.0);
}

TEST(Aggregate, RecomputableFromRecords) {
  std::vector<TrialRecord> records(4);
  const double values[] = {1.0, 2.0, 4.0, 100.0};
  for (std::size_t i = 0; i < 4; ++i) {
    records[i].index = i;
    records[i].metrics = {{"x", values[i]}, {"label", "a"}};
  }
  records[3].ok = false;  // failed trials do not count
  const json a = aggregate(records);
  ASSERT_TRUE(a.contains("x"));
  EXPECT_FALSE(a.contains("label"));
  EXPECT_EQ(a["x"]["count"], 3);
  EXPECT_DOUBLE_EQ(a["x"]["mean"].get<double>(), 7.0 / 3.0);
  EXPECT_DOUBLE_EQ(a["x"]["std"].get<double>(), std::sqrt(((4.0 / 3) * (4.0 / 3) + (1.0 / 3) * (1.0 / 3) + (5.0 / 3) * (5.0 / 3)) / 3.0));
  EXPECT_EQ(a["x"]["min"], 1.0);
  EXPECT_EQ(a["x"]["median"], 2.0);
  EXPECT_EQ(a["x"]["max"], 4.0);
}

TEST(RunCommand, FilterReportShape) {
  const CommandResult r = run_command(Command::Filter, load("filter_far_points.json"), quick());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["command"], "filter");
  ASSERT_EQ(r.report["trials"].size(), 2u);
  for (const auto& t : r.report["trials"]) {
    EXPECT_EQ(t["status"], "ok");
    const json& m = t["metrics"];
    for (const char* key : {"i_max", "mu_final", "stop_threshold", "target_rejected_fraction", "corrupted_rejected_fraction",
                            "clean_rejection"}) {
      EXPECT_TRUE(m.contains(key)) << key;
    }
    EXPECT_LE(m["mu_final"].get<double>(), m["stop_threshold"].get<double>());
    EXPECT_EQ(m["corrupted_rejected_fraction"], 1.0);
  }
  expect_finite_numbers(r.report);
  EXPECT_EQ(r.series_csv.substr(0, r.series_csv.find('\n')), "trial,round,mu,tau,removed");
}

TEST(RunCommand, LearnerScenarios) {
  const CommandResult pq = run_command(Command::Pq, load("pq_halfspace_shift.json"), quick());
  ASSERT_EQ(pq.exit_code, 0);
  EXPECT_LE(pq.report["aggregates"]["selected_error"]["mean"].get<double>(), 0.1);

  const CommandResult tds = run_command(Command::Tds, load("tds_identical.json"), quick(3));
  ASSERT_EQ(tds.exit_code, 0);
  EXPECT_GE(tds.report["aggregates"]["accept"]["mean"].get<double>(), 0.9);

  json nasty = load("nasty_corner.json");
  nasty["train"].erase("adversary");
  const CommandResult clean = run_command(Command::Nasty, nasty, quick());
  ASSERT_EQ(clean.exit_code, 0);
  EXPECT_LE(clean.report["aggregates"]["error"]["max"].get<double>(), 0.1);

  const CommandResult testable = run_command(Command::Testable, load("testable_tree_noise.json"), quick());
  ASSERT_EQ(testable.exit_code, 0);
  expect_finite_numbers(testable.report);
}

TEST(RunCommand, SeedOverrideChangesOnlySeededFields) {
  RunOptions a = quick(1);
  a.seed = 7;
  const CommandResult r1 = run_command(Command::Filter, load("filter_far_points.json"), a);
  const CommandResult r2 = run_command(Command::Filter, load("filter_far_points.json"), a);
  EXPECT_EQ(r1.report.dump(), r2.report.dump());
  a.seed = 8;
  const CommandResult r3 = run_command(Command::Filter, load("filter_far_points.json"), a);
  EXPECT_NE(r1.report["trials"].dump(), r3.report["trials"].dump());
  EXPECT_EQ(r1.report["config"]["filter"], r3.report["config"]["filter"]);
}

TEST(RunCommand, ConfigErrors) {
  json bad = load("filter_far_points.json");
  bad["filter"]["alpha"] = 2.0;
  EXPECT_THROW(run_command(Command::Filter, bad, quick()), ConfigError);
  json unknown = load("pq_halfspace_shift.json");
  unknown["learner"]["kind"] = "forest";
  EXPECT_THROW(run_command(Command::Pq, unknown, quick()), ConfigError);
  json no_train = load("tds_identical.json");
  no_train.erase("train");
  EXPECT_THROW(run_command(Command::Tds, no_train, quick()), ConfigError);
}

TEST(RunCommand, TrialFailuresAreRecorded) {
  json tiny = load("tds_identical.json");
  tiny["test"]["n"] = 50;  // fewer points than the rejection estimate needs
  const CommandResult r = run_command(Command::Tds, tiny, quick());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.failures, 2u);
  EXPECT_EQ(r.report["trials"][0]["status"], "failed");
  EXPECT_FALSE(r.report["trials"][0]["error"].get<std::string>().empty());
}

TEST(ExecuteCommand, WritesFilesAndIsDeterministic) {
  const fs::path root = fs::temp_directory_path() / ("shiftguard-cli-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::ostringstream err;
  RunOptions a = quick();
  a.out_dir = root / "a";
  RunOptions b = quick();
  b.out_dir = root / "b";
  b.jobs = 3;
  ASSERT_EQ(execute_command(Command::Filter, config_dir() / "filter_far_points.json", a, err), 0) << err.str();
  ASSERT_EQ(execute_command(Command::Filter, config_dir() / "filter_far_points.json", b, err), 0) << err.str();
  EXPECT_EQ(slurp(a.out_dir / "report.json"), slurp(b.out_dir / "report.json"));
  EXPECT_EQ(slurp(a.out_dir / "series.csv"), slurp(b.out_dir / "series.csv"));

  const fs::path broken = root / "broken.json";
  std::ofstream(broken) << "{\"trials\": 1,";
  EXPECT_EQ(execute_command(Command::Filter, broken, a, err), 2);
  EXPECT_EQ(execute_command(Command::Filter, root / "missing.json", a, err), 2);
  fs::remove_all(root);
}

}  // namespace
}  // namespace shiftguard::experiments
