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

#include "shiftguard/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shiftguard/errors.hpp"

namespace shiftguard {

FilterParameters resolve_filter_parameters(const FilterConfig& config, std::size_t basis_size, std::size_t n) {
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) throw InvalidArgument("filter epsilon must lie in (0, 1)");
  if (!(config.alpha > 0.0 && config.alpha <= 1.0)) throw InvalidArgument("filter alpha must lie in (0, 1]");
  if (!(config.delta > 0.0 && config.delta < 1.0)) throw InvalidArgument("filter delta must lie in (0, 1)");
  FilterParameters params;
  params.basis_size = basis_size;
  const double t = static_cast<double>(basis_size);
  params.clip_bound = config.clip_bound_override.value_or(4.0 * t * t * t / config.epsilon);
  if (!(params.clip_bound > 0.0)) throw InvalidArgument("clip bound must be positive");
  if (config.slack_override) {
    params.slack = *config.slack_override;
  } else {
    const double nn = static_cast<double>(std::max<std::size_t>(n, 2));
    const double theory = 200.0 * std::sqrt(t * t * (std::log(nn) / nn) * std::log(1.0 / config.delta));
    params.slack = std::min(theory, 1.0 / params.clip_bound);
  }
  if (params.slack < 0.0) throw InvalidArgument("slack must be non-negative");
  params.stop_threshold = (50.0 / config.alpha) * (1.0 + params.slack * params.clip_bound);
  return params;
}

Selector::Selector(MomentMatrix moments, double clip_bound, std::vector<FilterRound> rounds)
    : moments_(std::move(moments)), clip_bound_(clip_bound), rounds_(std::move(rounds)) {
  for (const auto& round : rounds_) {
    if (round.threshold < 0.0) throw InvalidArgument("selector thresholds must be non-negative");
    if (round.polynomial.basis()->size() != moments_.basis()->size()) {
      throw DimensionError("round polynomial basis differs from the moment basis");
    }
  }
}

int Selector::evaluate_features(std::span<const double> features) const {
  if (moments_.leverage(features) > clip_bound_) return 0;
  for (const auto& round : rounds_) {
    const double v = round.polynomial.eval_features(features);
    if (v * v > round.threshold) return 0;
  }
  return 1;
}

int Selector::evaluate(std::span<const double> x) const {
  const Eigen::VectorXd phi = basis()->features(x);
  return evaluate_features({phi.data(), static_cast<std::size_t>(phi.size())});
}

int evaluate_selector(const Selector& selector, std::span<const double> x) { return selector.evaluate(x); }

double rejection_fraction(const Selector& selector, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < data.size(); ++i) rejected += selector.evaluate(data.row(i)) == 0 ? 1 : 0;
  return static_cast<double>(rejected) / static_cast<double>(data.size());
}

double smoothness_check(const Selector& selector, const Dataset& smooth_sample) {
  return rejection_fraction(selector, smooth_sample);
}

std::size_t FilterOutcome::accepted_count() const {
  return static_cast<std::size_t>(std::count(accepted_mask.begin(), accepted_mask.end(), true));
}

std::vector<std::size_t> FilterOutcome::accepted_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < accepted_mask.size(); ++i) {
    if (accepted_mask[i]) out.push_back(i);
  }
  return out;
}

double FilterOutcome::rejected_fraction() const {
  if (accepted_mask.empty()) return 0.0;
  return 1.0 - static_cast<double>(accepted_count()) / static_cast<double>(accepted_mask.size());
}

namespace {

std::span<const double> row_span(const RowMatrix& m, std::size_t i) {
  return {m.row(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(m.cols())};
}

struct ThresholdChoice {
  double threshold = 0.0;
  bool forced = false;
};

// Smallest candidate tau (ascending over distinct survivor values) with
//   |{survivors : v > tau}| / n_target >= (10 / alpha) (Pr_ref[tau < r <= B0] + slack).
ThresholdChoice choose_threshold(std::vector<double> survivor_values, std::vector<double> reference_values,
                                 std::size_t n_target, double alpha, const FilterParameters& params) {
  std::sort(survivor_values.begin(), survivor_values.end());
  std::sort(reference_values.begin(), reference_values.end());
  const double n_ref = static_cast<double>(reference_values.size());
  const auto ref_at_most = [&](double v) {
    return static_cast<double>(std::upper_bound(reference_values.begin(), reference_values.end(), v) -
                               reference_values.begin());
  };
  const double ref_below_clip = ref_at_most(params.clip_bound);
  const std::size_t count = survivor_values.size();
  std::size_t i = 0;
  while (i < count) {
    const double tau = survivor_values[i];
    std::size_t j = i;
    while (j < count && survivor_values[j] == tau) ++j;
    const double above = static_cast<double>(count - j) / static_cast<double>(n_target);
    const double ref_band = tau < params.clip_bound ? (ref_below_clip - ref_at_most(tau)) / n_ref : 0.0;
    if (above >= (10.0 / alpha) * (ref_band + params.slack)) return {tau, false};
    i = j;
  }
  const double largest = survivor_values.back();
  return {std::max(0.0, std::nextafter(largest, 0.0)), true};
}

}  // namespace

FilterOutcome run_filter(const Dataset& reference, const Dataset& target, const FilterConfig& config) {
  if (reference.size() < 4 || target.size() < 4) throw InvalidArgument("filter needs at least 4 points per set");
  if (reference.dim() != target.dim()) throw DimensionError("reference and target dimensions differ");
  if (reference.domain != target.domain) throw InvalidArgument("reference and target domains differ");
  if (config.degree < 1) throw InvalidArgument("filter degree must be at least 1");
  validate_domain(reference);
  validate_domain(target);

  const BasisPtr basis = make_basis(reference.dim(), config.degree, reference.domain);
  const std::size_t n_target = target.size();
  FilterOutcome outcome;
  outcome.parameters = resolve_filter_parameters(config, basis->size(), std::min(reference.size(), n_target));
  const FilterParameters& params = outcome.parameters;
  const std::size_t max_rounds = config.max_rounds == 0 ? n_target : std::min(config.max_rounds, n_target);

  MomentMatrix moments = estimate_moments(reference, basis, config.delta / 10.0);
  const RowMatrix target_features = basis->features(target.points);
  const RowMatrix reference_features = basis->features(reference.points);

  std::vector<std::size_t> survivors;
  survivors.reserve(n_target);
  for (std::size_t i = 0; i < n_target; ++i) {
    if (moments.leverage(row_span(target_features, i)) > params.clip_bound) {
      ++outcome.clipped;
    } else {
      survivors.push_back(i);
    }
  }

  std::vector<FilterRound> rounds;
  const Eigen::Index t = static_cast<Eigen::Index>(basis->size());
  while (true) {
    RowMatrix gathered(static_cast<Eigen::Index>(survivors.size()), t);
    for (std::size_t s = 0; s < survivors.size(); ++s) {
      gathered.row(static_cast<Eigen::Index>(s)) = target_features.row(static_cast<Eigen::Index>(survivors[s]));
    }
    const Eigen::MatrixXd q = empirical_moment_matrix(gathered, static_cast<double>(n_target));
    MaxRatioResult top = max_ratio_polynomial(moments, q);
    if (top.value <= params.stop_threshold) {
      outcome.final_value = top.value;
      break;
    }
    if (rounds.size() >= max_rounds) {
      outcome.final_value = top.value;
      outcome.hit_round_cap = true;
      break;
    }

    std::vector<double> survivor_values(survivors.size());
    for (std::size_t s = 0; s < survivors.size(); ++s) {
      const double v = top.polynomial.eval_features(row_span(target_features, survivors[s]));
      survivor_values[s] = v * v;
    }
    std::vector<double> reference_values(reference.size());
    for (std::size_t r = 0; r < reference.size(); ++r) {
      const double v = top.polynomial.eval_features(row_span(reference_features, r));
      reference_values[r] = v * v;
    }
    const ThresholdChoice choice = choose_threshold(survivor_values, reference_values, n_target, config.alpha, params);

    std::vector<std::size_t> kept;
    kept.reserve(survivors.size());
    for (std::size_t s = 0; s < survivors.size(); ++s) {
      if (!(survivor_values[s] > choice.threshold)) kept.push_back(survivors[s]);
    }
    outcome.rounds.push_back({top.value, choice.threshold, survivors.size() - kept.size(), choice.forced});
    rounds.push_back({std::move(top.polynomial), choice.threshold});
    survivors = std::move(kept);
  }

  outcome.accepted_mask.assign(n_target, false);
  for (std::size_t i : survivors) outcome.accepted_mask[i] = true;
  outcome.emptied = survivors.empty();
  outcome.selector = Selector(std::move(moments), params.clip_bound, std::move(rounds));
  return outcome;
}

FilterOutcome run_filter_adversarial(const Dataset& reference, const Dataset& target, const FilterConfig& config) {
  return run_filter(reference, target, config);
}

}  // namespace shiftguard
