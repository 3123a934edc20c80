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
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace shiftguard::bench {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string measured;
  std::string target;
  double seconds = 0.0;
};

struct Criterion {
  int id = 0;
  std::string title;
  std::function<CriterionResult()> run;
};

std::vector<Criterion> acceptance_suite();
const Criterion& acceptance_criterion(int id);

std::vector<std::string> suite_names();

/// One table line: id, PASS/FAIL, title, measured vs target.
// Runs one criterion and stamps its id, title and wall time.
CriterionResult run_criterion(const Criterion& criterion);

std::string format_result(const CriterionResult& result);

struct SuiteOutcome {
  std::vector<CriterionResult> results;
  bool all_passed = true;
  /// Results without timings.
  nlohmann::json report;
};

/// Throws std::invalid_argument for an unknown suite name.
SuiteOutcome run_suite(std::string_view name, std::ostream& table);

// Independent oracles, shared with the unit tests.

/// Largest eigenvalue of P Q P with P the pseudo-inverse square root of M,
/// computed from a fresh dense eigendecomposition of M.
double sandwiched_top_eigenvalue(const Eigen::MatrixXd& m, const Eigen::MatrixXd& q, double rank_cutoff);

/// max over `samples` random unit p of p^T Q p / p^T M p.
double random_search_ratio(const Eigen::MatrixXd& m, const Eigen::MatrixXd& q, std::size_t samples,
                           std::uint64_t seed);

/// Whether some (w, tau) on a dense grid of the set ||w - w_hat|| <= r,
/// |tau - tau_hat| <= r classifies x differently from another grid element.
bool grid_disagreement(const Eigen::Vector2d& w_hat, double tau_hat, double radius, const Eigen::Vector2d& x,
                       int angles, int radii);

}  // namespace shiftguard::bench
