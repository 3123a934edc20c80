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

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "shiftguard/filter.hpp"
#include "shiftguard/learners.hpp"
#include "shiftguard/moments.hpp"
#include "shiftguard/regression.hpp"

namespace shiftguard {

// Container layout: the magic "SGCONT01", a little-endian u32 header length,
// a JSON header, then the payload as little-endian f64 values. The header
// names every payload section with its offset and length in values.

void write_selector(std::ostream& out, const Selector& selector);
Selector read_selector(std::istream& in);

void write_hypothesis(std::ostream& out, const PolynomialHypothesis& hypothesis);
PolynomialHypothesis read_hypothesis(std::istream& in);

struct LearnerOutput {
  Hypothesis h = ConstantHypothesis{1};
  AnySelector g = AcceptAll{};
  std::optional<Verdict> verdict;
  /// Free-form JSON object text.
  std::string diagnostics = "{}";
};

void write_learner_output(std::ostream& out, const LearnerOutput& output);
LearnerOutput read_learner_output(std::istream& in);

void save_selector(const std::filesystem::path& path, const Selector& selector);
Selector load_selector(const std::filesystem::path& path);
void save_learner_output(const std::filesystem::path& path, const LearnerOutput& output);
LearnerOutput load_learner_output(const std::filesystem::path& path);

/// JSON text holding the basis (d, k, domain), the rank cutoff and the
/// row-major matrix.
std::string moment_matrix_to_json(const MomentMatrix& moments);
MomentMatrix moment_matrix_from_json(const std::string& text);

}  // namespace shiftguard
