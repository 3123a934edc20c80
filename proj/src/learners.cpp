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

#include "shiftguard/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shiftguard/errors.hpp"
#include "shiftguard/synth.hpp"

namespace shiftguard {

namespace {

double dot(const Eigen::VectorXd& w, std::span<const double> x) {
  if (static_cast<std::size_t>(w.size()) != x.size()) throw DimensionError("weight and point dimensions differ");
  return ordered_dot({w.data(), static_cast<std::size_t>(w.size())}, x);
}

void check_rate(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw InvalidArgument(std::string(name) + " must lie in (0, 1)");
}

Dataset as_dataset(const LabeledDataset& data) { return data.x; }

}  // namespace

int Halfspace::predict(std::span<const double> x) const { return sign_of(dot(w, x) + tau); }

DisagreementSelector::DisagreementSelector(Eigen::VectorXd w, double tau, double radius)
    : w_(std::move(w)), tau_(tau), radius_(radius) {
  if (!(radius_ > 0.0)) throw InvalidArgument("disagreement radius must be positive");
  const double norm = w_.norm();
  if (std::abs(norm - 1.0) > 1e-9) throw InvalidArgument("disagreement direction must be a unit vector");
}

int DisagreementSelector::evaluate(std::span<const double> x) const {
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  return std::abs(dot(w_, x) + tau_) <= radius_ * (std::sqrt(norm2) + 1.0) ? 0 : 1;
}

int predict(const Hypothesis& h, std::span<const double> x) {
  return std::visit([&](const auto& v) { return v.predict(x); }, h);
}

int evaluate(const AnySelector& g, std::span<const double> x) {
  return std::visit([&](const auto& v) { return v.evaluate(x); }, g);
}

double rejection_rate(const AnySelector& g, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < data.size(); ++i) rejected += evaluate(g, data.row(i)) == 0 ? 1 : 0;
  return static_cast<double>(rejected) / static_cast<double>(data.size());
}

double selected_error(const Hypothesis& h, const AnySelector& g, const LabeledDataset& data) {
  std::size_t selected = 0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (evaluate(g, data.x.row(i)) == 0) continue;
    ++selected;
    if (predict(h, data.x.row(i)) != data.y[i]) ++wrong;
  }
  return selected == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(selected);
}

double error_rate(const Hypothesis& h, const LabeledDataset& data) {
  return selected_error(h, AcceptAll{}, data);
}

std::string_view to_string(PqBranch branch) {
  switch (branch) {
    case PqBranch::LowFrequency:
      return "low_frequency";
    case PqBranch::Recovery:
      return "recovery";
    case PqBranch::Homogeneous:
      return "homogeneous";
    case PqBranch::Sandwich:
      return "sandwich";
  }
  return "unknown";
}

std::string_view to_string(Verdict verdict) { return verdict == Verdict::Accept ? "accept" : "reject"; }

std::string_view to_string(ConceptClassTag tag) {
  switch (tag) {
    case ConceptClassTag::HalfspaceIntersection:
      return "intersection";
    case ConceptClassTag::DecisionTree:
      return "decision_tree";
    case ConceptClassTag::Formula:
      return "formula";
    case ConceptClassTag::Custom:
      return "custom";
  }
  return "unknown";
}

ConceptClassTag concept_class_from_string(std::string_view name) {
  if (name == "intersection") return ConceptClassTag::HalfspaceIntersection;
  if (name == "decision_tree") return ConceptClassTag::DecisionTree;
  if (name == "formula") return ConceptClassTag::Formula;
  if (name == "custom") return ConceptClassTag::Custom;
  throw InvalidArgument("unknown concept class tag: " + std::string(name));
}

namespace {

std::size_t saturating_ceil(double v) {
  if (!(v < static_cast<double>(std::numeric_limits<std::size_t>::max()))) {
    return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(std::ceil(v));
}

double basis_size_real(int dim, int degree, Domain domain) {
  // Sum over j <= k of C(d + j - 1, j) (real) or C(d, j) (hypercube).
  double total = 0.0;
  double term = 1.0;
  for (int j = 0; j <= degree; ++j) {
    if (j > 0) {
      term = domain == Domain::Real ? term * (dim + j - 1) / j : term * (dim - j + 1) / j;
    }
    if (term <= 0.0) break;
    total += term;
  }
  return total;
}

}  // namespace

SandwichParameters sandwich_degree_lookup(const ConceptClass& cls, double epsilon, int dim, Domain domain,
                                          double delta, double constant) {
  check_rate(epsilon, "epsilon");
  check_rate(delta, "delta");
  if (dim < 1) throw InvalidArgument("dimension must be positive");
  if (!(constant > 0.0)) throw InvalidArgument("lookup constant must be positive");
  SandwichParameters out;
  double k = 0.0;
  switch (cls.tag) {
    case ConceptClassTag::Custom:
      if (cls.custom_degree < 1 || !(cls.custom_coefficient_bound > 0.0) || cls.custom_sample_size < 1) {
        throw InvalidArgument("custom reasonable pair needs k >= 1, B > 0, m >= 1");
      }
      return {cls.custom_degree, cls.custom_coefficient_bound, cls.custom_sample_size};
    case ConceptClassTag::DecisionTree:
      if (cls.size < 1) throw InvalidArgument("tree size must be positive");
      k = std::ceil(constant * std::log2(cls.size / epsilon));
      break;
    case ConceptClassTag::HalfspaceIntersection:
      if (cls.count < 1) throw InvalidArgument("intersection count must be positive");
      k = std::ceil(constant * std::pow(cls.count, 6) / (epsilon * epsilon));
      break;
    case ConceptClassTag::Formula:
      if (cls.size < 1 || cls.count < 1) throw InvalidArgument("formula size and depth must be positive");
      k = std::ceil(std::pow(constant * std::log2(cls.size / epsilon), 2.5 * cls.count) * std::sqrt(cls.size));
      break;
  }
  k = std::max(k, 1.0);
  if (k > 1e6) throw InvalidArgument("sandwiching degree is out of range");
  out.degree = static_cast<int>(k);
  const double t = basis_size_real(dim, out.degree, domain);
  out.coefficient_bound = t * t;
  out.sample_size = saturating_ceil(std::pow(static_cast<double>(dim) * k, k) / delta);
  return out;
}

ReasonablePairConfig make_reasonable_pair(const ConceptClass& cls, double epsilon, int dim, Domain domain,
                                          double delta) {
  const SandwichParameters p = sandwich_degree_lookup(cls, epsilon, dim, domain, delta);
  return {cls, epsilon, p.degree, p.coefficient_bound, p.sample_size};
}

Halfspace recover_halfspace(const LabeledDataset& data) {
  validate_labels(data);
  const std::size_t n = data.size();
  if (n < 2) throw InvalidArgument("halfspace recovery needs at least 2 points");
  const auto positives = static_cast<std::size_t>(std::count(data.y.begin(), data.y.end(), 1));
  if (positives == 0 || positives == n) throw InvalidArgument("halfspace recovery needs both labels");

  const int d = data.dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    sum += data.y[i] * data.x.points.row(static_cast<Eigen::Index>(i)).transpose();
  }
  const double norm = sum.norm();
  if (!(norm > 0.0)) throw DegenerateError("sum of x * y is zero");
  Halfspace h;
  h.w = sum / norm;

  std::vector<double> proj(n);
  for (std::size_t i = 0; i < n; ++i) proj[i] = dot(h.w, data.x.row(i));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return proj[a] < proj[b]; });

  // tau = -v predicts +1 exactly on projections >= v.
  std::size_t negatives_above = n - positives;  // -1 labels predicted +1
  std::size_t positives_below = 0;              // +1 labels predicted -1
  std::size_t best_errors = std::numeric_limits<std::size_t>::max();
  std::size_t i = 0;
  while (i < n) {
    const double v = proj[order[i]];
    const std::size_t errors = negatives_above + positives_below;
    if (errors < best_errors) {
      best_errors = errors;
      h.tau = -v;
    }
    while (i < n && proj[order[i]] == v) {
      if (data.y[order[i]] == 1) {
        ++positives_below;
      } else {
        --negatives_above;
      }
      ++i;
    }
  }
  return h;
}

std::size_t amplify_index(std::span<const Eigen::VectorXd> candidates) {
  if (candidates.empty()) throw InvalidArgument("amplification needs at least one candidate");
  std::size_t best = 0;
  double best_total = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (candidates[j].size() != candidates[i].size()) throw DimensionError("candidates differ in dimension");
      total += (candidates[i] - candidates[j]).norm();
    }
    if (total < best_total) {
      best_total = total;
      best = i;
    }
  }
  return best;
}

Eigen::VectorXd amplify(std::span<const Eigen::VectorXd> candidates) {
  return candidates[amplify_index(candidates)];
}

PqOutput pq_learn_halfspace(const LabeledDataset& train, const Dataset& test, double epsilon, double delta,
                            const LearnerConstants& constants) {
  check_rate(epsilon, "epsilon");
  check_rate(delta, "delta");
  validate_labels(train);
  const std::size_t n = train.size();
  if (n < 4) throw InvalidArgument("PQ learning needs at least 4 training points");
  const int d = train.dim();

  PqOutput out{ConstantHypothesis{1}, AcceptAll{}, {}};
  const auto positives = static_cast<std::size_t>(std::count(train.y.begin(), train.y.end(), 1));
  const double pos_freq = static_cast<double>(positives) / static_cast<double>(n);
  out.diagnostics.min_label_frequency = std::min(pos_freq, 1.0 - pos_freq);

  if (out.diagnostics.min_label_frequency <= std::pow(epsilon, constants.c2) / constants.c1) {
    out.diagnostics.branch = PqBranch::LowFrequency;
    out.h = ConstantHypothesis{2 * positives >= n ? 1 : -1};
    FilterConfig config;
    config.degree = std::max(1, static_cast<int>(std::ceil(constants.c3 * std::log(1.0 / epsilon))));
    config.epsilon = epsilon;
    config.alpha = epsilon / 2.0;
    config.delta = delta;
    FilterOutcome filtered = run_filter(train.x, test, config);
    out.diagnostics.degree = config.degree;
    out.diagnostics.filter_rounds = filtered.rounds.size();
    out.diagnostics.filter_final_value = filtered.final_value;
    out.diagnostics.filter_clipped = filtered.clipped;
    out.diagnostics.target_rejection = filtered.rejected_fraction();
    out.g = std::move(filtered.selector);
    return out;
  }

  out.diagnostics.branch = PqBranch::Recovery;
  const auto trials =
      std::min<std::size_t>(n / 2, static_cast<std::size_t>(std::ceil(8.0 * std::log(1.0 / delta))));
  const std::size_t chunk = n / std::max<std::size_t>(trials, 1);
  std::vector<Eigen::VectorXd> candidates;
  for (std::size_t c = 0; c < trials; ++c) {
    const LabeledDataset part = train.slice(c * chunk, (c + 1) * chunk);
    try {
      const Halfspace h = recover_halfspace(part);
      Eigen::VectorXd v(d + 1);
      v.head(d) = h.w;
      v[d] = h.tau;
      candidates.push_back(std::move(v));
    } catch (const InvalidArgument&) {
      // single-label chunk
    } catch (const DegenerateError&) {
    }
  }
  Halfspace h;
  if (candidates.empty()) {
    h = recover_halfspace(train);
  } else {
    const std::size_t best = amplify_index(candidates);
    h.w = candidates[best].head(d).normalized();
    h.tau = candidates[best][d];
    out.diagnostics.selected_candidate = best;
  }
  out.diagnostics.recovery_trials = candidates.size();
  const double radius = std::pow(epsilon / d, constants.c2) / constants.c1;
  out.diagnostics.radius = radius;
  out.g = DisagreementSelector(h.w, h.tau, radius);
  out.diagnostics.target_rejection = rejection_rate(out.g, test);
  out.h = std::move(h);
  return out;
}

PqOutput pq_learn_homogeneous(const LabeledDataset& train, double epsilon, double delta,
                              std::uint64_t calibration_seed) {
  check_rate(epsilon, "epsilon");
  check_rate(delta, "delta");
  validate_labels(train);
  if (train.size() < 1) throw InvalidArgument("homogeneous learner needs data");
  const int d = train.dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < train.size(); ++i) {
    sum += train.y[i] * train.x.points.row(static_cast<Eigen::Index>(i)).transpose();
  }
  const double norm = sum.norm();
  if (!(norm > 0.0)) throw DegenerateError("sum of x * y is zero");
  Halfspace h{sum / norm, 0.0};

  const std::size_t mc = std::max<std::size_t>(
      20000, static_cast<std::size_t>(std::ceil(8.0 / (epsilon * epsilon) * std::log(2.0 / delta))));
  const Dataset gaussian = Generator::gaussian(d, calibration_seed).sample(mc);
  const auto rate_at = [&](double r) { return rejection_rate(DisagreementSelector(h.w, 0.0, r), gaussian); };

  double radius = epsilon / std::sqrt(static_cast<double>(d));
  double rate = rate_at(radius);
  if (rate > epsilon) {
    double lo = 0.0;
    double hi = radius;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (rate_at(mid) <= epsilon ? lo : hi) = mid;
    }
    radius = lo > 0.0 ? lo : std::numeric_limits<double>::min();
    rate = rate_at(radius);
  }
  PqOutput out{std::move(h), DisagreementSelector(sum / norm, 0.0, radius), {}};
  out.diagnostics.branch = PqBranch::Homogeneous;
  out.diagnostics.radius = radius;
  out.diagnostics.target_rejection = rate;
  return out;
}

namespace {

void check_pair(const ReasonablePairConfig& pair) {
  if (pair.degree < 1 || !(pair.coefficient_bound > 0.0) || pair.sample_size < 1) {
    throw InvalidArgument("reasonable pair needs k >= 1, B > 0, m >= 1");
  }
}

PolynomialHypothesis l2_hypothesis(const LabeledDataset& train, const ReasonablePairConfig& pair) {
  RegressionConfig rc;
  rc.degree = pair.degree;
  rc.coefficient_bound = pair.coefficient_bound;
  return PolynomialHypothesis(l2_box_regression(train, rc).polynomial, 0.0);
}

}  // namespace

PqOutput pq_learn_sandwich(const LabeledDataset& train, const Dataset& test, const ReasonablePairConfig& pair,
                           double epsilon, double eta, double delta) {
  check_rate(epsilon, "epsilon");
  check_rate(eta, "eta");
  check_rate(delta, "delta");
  check_pair(pair);
  validate_labels(train);
  FilterConfig config;
  config.degree = pair.degree;
  config.epsilon = eta / 2.0;
  config.alpha = eta / 2.0;
  config.delta = delta;
  FilterOutcome filtered = run_filter(train.x, test, config);

  PqOutput out{l2_hypothesis(train, pair), std::move(filtered.selector), {}};
  out.diagnostics.branch = PqBranch::Sandwich;
  out.diagnostics.degree = pair.degree;
  out.diagnostics.filter_rounds = filtered.rounds.size();
  out.diagnostics.filter_final_value = filtered.final_value;
  out.diagnostics.filter_clipped = filtered.clipped;
  out.diagnostics.target_rejection = filtered.rejected_fraction();
  return out;
}

AdversarialPqOutput pq_learn_adversarial(const LabeledDataset& train, const Dataset& test,
                                         const ReasonablePairConfig& pair, double epsilon, double eta, double delta) {
  check_rate(epsilon, "epsilon");
  check_rate(eta, "eta");
  check_rate(delta, "delta");
  check_pair(pair);
  validate_labels(train);
  FilterConfig config;
  config.degree = pair.degree;
  config.epsilon = epsilon;
  config.alpha = eta;
  config.delta = delta;
  AdversarialPqOutput out;
  out.filter = run_filter_adversarial(train.x, test, config);
  out.accepted = out.filter.accepted_indices();
  out.h = l2_hypothesis(train, pair);
  return out;
}

std::size_t estimation_sample_size(double epsilon, double delta) {
  check_rate(epsilon, "epsilon");
  check_rate(delta, "delta");
  return static_cast<std::size_t>(std::ceil(2.0 / (epsilon * epsilon) * std::log(4.0 / delta)));
}

TdsOutput tds_learn(const LabeledDataset& train, const Dataset& test, const ReasonablePairConfig& pair, double epsilon,
                    double theta, double delta, const LearnerConstants& constants) {
  check_rate(theta, "theta");
  check_pair(pair);
  validate_labels(train);
  const std::size_t n_est = estimation_sample_size(epsilon, delta);
  if (test.size() < n_est + 4) {
    throw InsufficientDataError("TDS learning needs at least " + std::to_string(n_est + 4) + " test points");
  }
  const std::size_t split = test.size() - n_est;
  FilterConfig config;
  config.degree = pair.degree;
  config.epsilon = epsilon / constants.c_tds;
  config.alpha = 1.0;
  config.delta = delta;
  FilterOutcome filtered = run_filter(train.x, test.slice(0, split), config);

  TdsOutput out;
  out.filter_rounds = filtered.rounds.size();
  out.estimated_rejection_rate = rejection_fraction(filtered.selector, test.slice(split, test.size()));
  out.rejection_threshold = 2.0 * theta + 2.0 * epsilon / constants.c_tds;
  out.g = std::move(filtered.selector);
  if (out.estimated_rejection_rate > out.rejection_threshold) return out;
  out.verdict = Verdict::Accept;
  out.h = l2_hypothesis(train, pair);
  return out;
}

TdsOutput pq_to_tds(const PqOutput& pq, const Dataset& test, double eta, double theta, double epsilon, double delta) {
  check_rate(eta, "eta");
  check_rate(theta, "theta");
  const std::size_t n_est = estimation_sample_size(epsilon, delta);
  if (test.size() < n_est) {
    throw InsufficientDataError("rejection estimate needs at least " + std::to_string(n_est) + " test points");
  }
  TdsOutput out;
  out.g = pq.g;
  out.estimated_rejection_rate = rejection_rate(pq.g, test);
  out.rejection_threshold = eta + theta + epsilon / 2.0;
  if (out.estimated_rejection_rate > out.rejection_threshold) return out;
  out.verdict = Verdict::Accept;
  out.h = pq.h;
  return out;
}

TdsOutput testable_learn(const LabeledDataset& labeled, const Dataset& reference, const ReasonablePairConfig& pair,
                         double epsilon, double theta, double delta, const LearnerConstants& constants) {
  check_rate(theta, "theta");
  check_pair(pair);
  validate_labels(labeled);
  const std::size_t n_est = estimation_sample_size(epsilon, delta);
  if (labeled.size() < n_est + 8) {
    throw InsufficientDataError("testable learning needs at least " + std::to_string(n_est + 8) + " labeled points");
  }
  const std::size_t rest = labeled.size() - n_est;
  const std::size_t half = rest / 2;
  FilterConfig config;
  config.degree = pair.degree;
  config.epsilon = epsilon / constants.c_testable;
  config.alpha = 1.0;
  config.delta = delta;
  FilterOutcome filtered = run_filter(reference, labeled.x.slice(0, half), config);

  TdsOutput out;
  out.filter_rounds = filtered.rounds.size();
  out.estimated_rejection_rate = rejection_fraction(filtered.selector, labeled.x.slice(rest, labeled.size()));
  out.rejection_threshold = 2.0 * theta + 2.0 * epsilon / constants.c_testable;
  if (out.estimated_rejection_rate > out.rejection_threshold) {
    out.g = std::move(filtered.selector);
    return out;
  }

  std::vector<std::size_t> kept;
  for (std::size_t i = half; i < rest; ++i) {
    if (filtered.selector.evaluate(labeled.x.row(i)) == 1) kept.push_back(i);
  }
  out.conditioned_size = kept.size();
  out.g = std::move(filtered.selector);
  if (kept.size() < pair.sample_size) {
    throw InsufficientDataError("only " + std::to_string(kept.size()) + " points remain after conditioning, " +
                                std::to_string(pair.sample_size) + " needed");
  }
  RegressionConfig rc;
  rc.degree = pair.degree;
  rc.coefficient_bound = pair.coefficient_bound;
  out.h = l1_regression_with_threshold(labeled.subset(kept), rc).hypothesis;
  out.verdict = Verdict::Accept;
  return out;
}

NastyOutput nasty_learn(const LabeledDataset& data, const Dataset& reference, const ReasonablePairConfig& pair,
                        double epsilon, double delta, const LearnerConstants& constants) {
  check_pair(pair);
  validate_labels(data);
  FilterConfig config;
  config.degree = pair.degree;
  config.epsilon = epsilon / constants.c_testable;
  config.alpha = 1.0;
  config.delta = delta;
  const FilterOutcome filtered = run_filter_adversarial(reference, as_dataset(data), config);

  NastyOutput out;
  out.accepted = filtered.accepted_indices();
  out.filter_rounds = filtered.rounds.size();
  const std::size_t minimum = std::max<std::size_t>(2, basis_size(data.dim(), pair.degree, data.x.domain));
  if (out.accepted.size() < minimum) {
    throw InsufficientDataError("only " + std::to_string(out.accepted.size()) + " points survive the filter");
  }
  RegressionConfig rc;
  rc.degree = pair.degree;
  rc.coefficient_bound = pair.coefficient_bound;
  out.h = l1_regression_with_threshold(data.subset(out.accepted), rc).hypothesis;
  return out;
}

}  // namespace shiftguard
