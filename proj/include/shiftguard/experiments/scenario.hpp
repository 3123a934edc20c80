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
#include <optional>
#include <string>

#include "json.hpp"
#include "shiftguard/errors.hpp"
#include "shiftguard/filter.hpp"
#include "shiftguard/learners.hpp"
#include "shiftguard/synth.hpp"

namespace shiftguard::experiments {

using nlohmann::json;

/// Raised for malformed or out-of-range configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

Generator parse_generator(const json& j, std::uint64_t seed);
Concept parse_concept(const json& j);
/// `default_clip_bound` is used by the far-point factory when the config
/// gives none.
Adversary parse_adversary(const json& j, std::uint64_t seed, int default_degree, double default_clip_bound);
FilterConfig parse_filter_config(const json& j);
LearnerConstants parse_constants(const json& j);
ReasonablePairConfig parse_pair(const json& j, double epsilon, int dim, Domain domain, double delta);

/// Generator, optional concept and adversary for one sample of a scenario.
struct SampleSpec {
  json generator;
  std::optional<json> concept_spec;
  json adversary = json::object();
  std::size_t n = 0;
};

SampleSpec parse_sample(const json& j, std::size_t default_n);

struct DrawnSample {
  LabeledDataset data;  // labels empty without a concept
  std::vector<bool> corrupted;
  Generator generator;
  std::optional<Concept> labeler;
};

/// Role selects independent seed streams for the different samples of one
/// trial. Fresh draws (stream > 0) use the same generator without corruption.
DrawnSample draw(const SampleSpec& spec, std::uint64_t trial_seed, std::uint64_t role, int default_degree,
                 double default_clip_bound);
LabeledDataset draw_fresh(const DrawnSample& base, std::size_t n, std::uint64_t stream);

/// Rates must lie in (0, 1).
double rate_field(const json& j, const char* key, double fallback);

}  // namespace shiftguard::experiments
