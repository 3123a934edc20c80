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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "shiftguard/dataset.hpp"
#include "shiftguard/moments.hpp"
#include "shiftguard/polynomial.hpp"

namespace shiftguard {

struct FilterConfig {
  int degree = 2;
  /// Target clean-rejection slack.
  double epsilon = 0.1;
  /// Trade-off between rejection validity and spectral boundedness, in (0, 1].
  double alpha = 1.0;
  double delta = 0.1;
  std::optional<double> clip_bound_override;
  std::optional<double> slack_override;
  /// 0 means "number of target points".
  std::size_t max_rounds = 0;
};

/// Resolved numeric parameters of one filter run.
struct FilterParameters {
  std::size_t basis_size = 0;
  double clip_bound = 0.0;      // B0
  double slack = 0.0;           // Delta0
  double stop_threshold = 0.0;  // (50 / alpha)(1 + Delta0 B0)
};

/// Defaults: B0 = 4 t^3 / epsilon and
/// Delta0 = min(200 sqrt(t^2 (ln N / N) ln(1/delta)), 1 / B0).
FilterParameters resolve_filter_parameters(const FilterConfig& config, std::size_t basis_size, std::size_t n);

struct FilterRound {
  Polynomial polynomial;
  double threshold = 0.0;
};

/// Succinct description of the selector g: a point is rejected (0) iff its
/// leverage phi^T M^+ phi exceeds the clip bound or some round polynomial
/// satisfies p_i(x)^2 > tau_i.
class Selector {
 public:
  Selector() = default;
  Selector(MomentMatrix moments, double clip_bound, std::vector<FilterRound> rounds);

  const MomentMatrix& moments() const { return moments_; }
  const BasisPtr& basis() const { return moments_.basis(); }
  double clip_bound() const { return clip_bound_; }
  const std::vector<FilterRound>& rounds() const { return rounds_; }
  std::size_t round_count() const { return rounds_.size(); }

  int evaluate(std::span<const double> x) const;
  int evaluate_features(std::span<const double> features) const;

 private:
  MomentMatrix moments_;
  double clip_bound_ = 0.0;
  std::vector<FilterRound> rounds_;
};

struct RoundLog {
  double value = 0.0;  // mu_i
  double threshold = 0.0;
  std::size_t removed = 0;
  /// No candidate threshold met the removal condition; the single largest
  /// point was removed instead.
  bool forced = false;
};

struct FilterOutcome {
  Selector selector;
  std::vector<bool> accepted_mask;
  double final_value = 0.0;  // mu at the stopping test
  std::vector<RoundLog> rounds;
  FilterParameters parameters;
  std::size_t clipped = 0;
  /// No target point survived; the empty set is trivially bounded.
  bool emptied = false;
  /// max_rounds was reached before the stopping test passed.
  bool hit_round_cap = false;

  std::size_t accepted_count() const;
  std::vector<std::size_t> accepted_indices() const;
  double rejected_fraction() const;
};

/// Spectral outlier removal of `target` against the clean `reference`
/// sample. Each round finds the polynomial with the largest second-moment
/// ratio over the surviving target points, and while it exceeds the stop
/// threshold removes the points where that polynomial is largest.
FilterOutcome run_filter(const Dataset& reference, const Dataset& target, const FilterConfig& config);

/// Same computation as run_filter, for a target set built by adversarial
/// replacement of a clean sample; the accepted set is the dataset-level output.
FilterOutcome run_filter_adversarial(const Dataset& reference, const Dataset& target, const FilterConfig& config);

int evaluate_selector(const Selector& selector, std::span<const double> x);

/// Fraction of points the selector rejects; 0 for an empty dataset.
double rejection_fraction(const Selector& selector, const Dataset& data);

/// Rejection fraction on a sample from a distribution assumed smooth with
/// respect to the reference.
double smoothness_check(const Selector& selector, const Dataset& smooth_sample);

}  // namespace shiftguard
