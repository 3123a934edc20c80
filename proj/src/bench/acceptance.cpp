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

#include "shiftguard/bench/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include <Eigen/Eigenvalues>

#include "shiftguard/experiments/commands.hpp"
#include "shiftguard/filter.hpp"
#include "shiftguard/learners.hpp"
#include "shiftguard/moments.hpp"
#include "shiftguard/regression.hpp"
#include "shiftguard/synth.hpp"

namespace shiftguard::bench {

using nlohmann::json;

double sandwiched_top_eigenvalue(const Eigen::MatrixXd& m, const Eigen::MatrixXd& q, double rank_cutoff) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double top = lambda.maxCoeff();
  Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] > rank_cutoff * top) inv_sqrt[i] = 1.0 / std::sqrt(lambda[i]);
  }
  const Eigen::MatrixXd p = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
  const Eigen::MatrixXd s = p * q * p;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> top_solver(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  return top_solver.eigenvalues().maxCoeff();
}

double random_search_ratio(const Eigen::MatrixXd& m, const Eigen::MatrixXd& q, std::size_t samples,
                           std::uint64_t seed) {
  Rng rng(seed, 0);
  const Eigen::Index t = m.rows();
  Eigen::VectorXd p(t);
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < t; ++i) p[i] = rng.normal();
    const double den = p.dot(m * p);
    if (den <= 0.0) continue;
    best = std::max(best, p.dot(q * p) / den);
  }
  return best;
}

bool grid_disagreement(const Eigen::Vector2d& w_hat, double tau_hat, double radius, const Eigen::Vector2d& x,
                       int angles, int radii) {
  bool positive = false;
  bool negative = false;
  for (int a = 0; a < angles; ++a) {
    const double phi = 2.0 * std::numbers::pi * a / angles;
    const Eigen::Vector2d dir(std::cos(phi), std::sin(phi));
    for (int j = 0; j <= radii; ++j) {
      const Eigen::Vector2d w = w_hat + (radius * j / radii) * dir;
      for (int k = -radii; k <= radii; ++k) {
        const double v = w.dot(x) + tau_hat + radius * k / radii;
        (v >= 0.0 ? positive : negative) = true;
        if (positive && negative) return true;
      }
    }
  }
  return false;
}

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

std::string count_of(std::size_t k, std::size_t n) { return std::to_string(k) + "/" + std::to_string(n); }

double hoeffding_slack(std::size_t n) { return 3.0 * std::sqrt(std::log(20.0) / (2.0 * static_cast<double>(n))); }

std::vector<double> unit_vector(int d, std::uint64_t seed) {
  Rng rng(seed, 7);
  std::vector<double> w(static_cast<std::size_t>(d));
  double norm2 = 0.0;
  for (double& v : w) {
    v = rng.normal();
    norm2 += v * v;
  }
  for (double& v : w) v /= std::sqrt(norm2);
  return w;
}

Eigen::MatrixXd accepted_moments(const FilterOutcome& o, const Dataset& target) {
  const BasisPtr basis = o.selector.basis();
  const RowMatrix f = basis->features(target.points);
  std::vector<std::size_t> idx = o.accepted_indices();
  RowMatrix kept(static_cast<Eigen::Index>(idx.size()), f.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) kept.row(static_cast<Eigen::Index>(i)) = f.row(static_cast<Eigen::Index>(idx[i]));
  return empirical_moment_matrix(kept, static_cast<double>(target.size()));
}

// ---------------------------------------------------------------- 1

CriterionResult moment_bracket() {
  const int trials = 50;
  int good = 0;
  double worst = 0.0;
  const BasisPtr basis = make_basis(2, 2, Domain::Real);
  const std::vector<Polynomial> qs = orthonormal_test_basis(basis, Reference::GaussianStd);
  for (int trial = 0; trial < trials; ++trial) {
    const Dataset s = Generator::gaussian(2, derive_seed(101, static_cast<std::uint64_t>(trial))).sample(100000);
    const MomentMatrix m = estimate_moments(s, basis, 0.1);
    bool ok = true;
    for (const auto& q : qs) {
      const double v = q.coefficients().dot(m.matrix() * q.coefficients());
      worst = std::max(worst, std::abs(v - 1.0));
      ok = ok && v >= 0.85 && v <= 1.15;
    }
    good += ok ? 1 : 0;
  }
  return {1, "", good >= 48, count_of(static_cast<std::size_t>(good), trials) + " trials in bracket, worst |qMq-1| " + fmt(worst),
          ">= 48/50 trials with every q^T M q in [0.85, 1.15]"};
}

// ------------------------------------------------------------ 2 and 6

struct FilterScenario {
  std::string name;
  Dataset reference;
  Dataset target;
  FilterConfig config;
};

std::vector<FilterScenario> randomized_filter_scenarios() {
  const std::array<double, 4> rates = {0.0, 0.1, 0.5, 1.0};
  std::vector<FilterScenario> out;
  for (int i = 0; i < 20; ++i) {
    const double rate = rates[static_cast<std::size_t>(i % 4)];
    const int variant = i / 4;
    const std::uint64_t seed = derive_seed(202, static_cast<std::uint64_t>(i));
    FilterScenario s;
    s.config.epsilon = 0.1;
    s.config.alpha = (i % 2 == 0) ? 0.5 : 1.0;
    s.config.delta = 0.1;
    Generator gen = Generator::gaussian(2, seed);
    Adversary adv = Adversary::none();
    const std::size_t n = 3000;
    switch (variant) {
      case 0:
        s.config.degree = 2;
        adv = Adversary::replace_far(rate, 2, 4.0 * 216.0 / 0.1, seed + 1);
        break;
      case 1:
        s.config.degree = 2;
        adv = Adversary::replace_fixed(rate, {6.0, 6.0}, seed + 1);
        break;
      case 2:
        gen = Generator::gaussian(3, seed);
        s.config.degree = 2;
        adv = Adversary::replace_fixed(rate, {0.0, 6.0, 6.0}, seed + 1);
        break;
      case 3:
        gen = Generator::hypercube(6, seed);
        s.config.degree = 2;
        adv = Adversary::replace_corner(rate, seed + 1);
        break;
      default:
        s.config.degree = 3;
        adv = Adversary::replace_fixed(rate, {4.0, 4.0}, seed + 1);
        break;
    }
    s.name = "variant " + std::to_string(variant) + " rate " + fmt(rate);
    s.reference = gen.sample(n, 0);
    s.target = corrupt(gen.sample(n, 1), adv).data.x;
    out.push_back(std::move(s));
  }
  return out;
}

CriterionResult stopping_soundness() {
  std::size_t good = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  std::size_t total_rounds = 0;
  const auto scenarios = randomized_filter_scenarios();
  for (const auto& s : scenarios) {
    const FilterOutcome o = run_filter(s.reference, s.target, s.config);
    const double top = sandwiched_top_eigenvalue(o.selector.moments().matrix(), accepted_moments(o, s.target),
                                                 o.selector.moments().rank_cutoff());
    worst_margin = std::max(worst_margin, top - o.parameters.stop_threshold);
    total_rounds += o.rounds.size();
    good += top <= o.parameters.stop_threshold + 1e-6 ? 1 : 0;
  }
  return {2, "", good == scenarios.size(),
          count_of(good, scenarios.size()) + " sound, max (lambda - threshold) " + fmt(worst_margin) + ", " +
              std::to_string(total_rounds) + " rounds total",
          "all 20 scenarios: lambda_max <= (50/alpha)(1 + D0 B0) + 1e-6"};
}

// ---------------------------------------------------------------- 3

CriterionResult clean_validity() {
  const std::size_t n = 20000;
  const double bound = 0.10 + hoeffding_slack(n);
  FilterConfig config;
  config.degree = 2;
  config.alpha = 0.5;
  config.epsilon = 0.1;
  config.delta = 0.1;
  int good = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Generator gen = Generator::gaussian(2, derive_seed(303, static_cast<std::uint64_t>(trial)));
    const FilterOutcome o = run_filter(gen.sample(n, 0), gen.sample(n, 1), config);
    const double rate = rejection_fraction(o.selector, gen.sample(n, 2));
    worst = std::max(worst, rate);
    good += rate <= bound ? 1 : 0;
  }
  return {3, "", good >= 18, count_of(static_cast<std::size_t>(good), 20) + " trials, worst fresh rejection " + fmt(worst),
          ">= 18/20 trials with rejection <= " + fmt(bound)};
}

// ---------------------------------------------------------------- 4

CriterionResult adversarial_validity() {
  const std::size_t n = 20000;
  FilterConfig config;
  config.degree = 2;
  config.alpha = 0.5;
  config.epsilon = 0.1;
  config.delta = 0.1;
  const double clip = 4.0 * 216.0 / config.epsilon;
  const double clean_bound = config.alpha * 0.1 * n + config.epsilon / 2.0 * n + 3.0 * std::sqrt(double(n));
  int good = 0;
  double worst_caught = 1.0;
  std::size_t worst_clean = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t seed = derive_seed(404, static_cast<std::uint64_t>(trial));
    const Generator gen = Generator::gaussian(2, seed);
    const Corruption c = corrupt(gen.sample(n, 1), Adversary::replace_far(0.1, 2, clip, seed + 1));
    const FilterOutcome o = run_filter(gen.sample(n, 0), c.data.x, config);
    std::size_t caught = 0;
    std::size_t clean_rejected = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (c.mask[i] && !o.accepted_mask[i]) ++caught;
      if (!c.mask[i] && !o.accepted_mask[i]) ++clean_rejected;
    }
    const double caught_fraction = static_cast<double>(caught) / static_cast<double>(c.indices.size());
    worst_caught = std::min(worst_caught, caught_fraction);
    worst_clean = std::max(worst_clean, clean_rejected);
    good += (caught_fraction >= 0.99 && static_cast<double>(clean_rejected) <= clean_bound) ? 1 : 0;
  }
  return {4, "", good == 20,
          count_of(static_cast<std::size_t>(good), 20) + " trials, min injected caught " + fmt(worst_caught) +
              ", max clean rejected " + std::to_string(worst_clean),
          "every trial: >= 99% injected rejected and clean rejected <= " + fmt(clean_bound, 6)};
}

// ---------------------------------------------------------------- 5

CriterionResult smoothness_completeness() {
  const std::size_t n = 20000;
  FilterConfig config;
  config.degree = 2;
  config.alpha = 1.0;
  config.epsilon = 0.1;
  config.delta = 0.1;
  const double bound = config.epsilon / 2.0 + hoeffding_slack(n);
  int good = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t seed = derive_seed(505, static_cast<std::uint64_t>(trial));
    const Generator base = Generator::gaussian(2, seed);
    const Generator half = Generator::conditioned_half(base, {1.0, 0.0}, seed + 1);
    const FilterOutcome o = run_filter(base.sample(n, 0), half.sample(n, 0), config);
    const double rate = smoothness_check(o.selector, half.sample(n, 1));
    worst = std::max(worst, rate);
    good += rate <= bound ? 1 : 0;
  }
  return {5, "", good >= 18, count_of(static_cast<std::size_t>(good), 20) + " trials, worst rejection " + fmt(worst),
          ">= 18/20 trials with rejection <= " + fmt(bound)};
}

// ---------------------------------------------------------------- 6

CriterionResult iteration_bounds() {
  auto scenarios = randomized_filter_scenarios();
  // Heavier corruption mixtures that force many rounds.
  for (int i = 0; i < 6; ++i) {
    const std::uint64_t seed = derive_seed(606, static_cast<std::uint64_t>(i));
    const Generator gen = Generator::gaussian(2, seed);
    FilterScenario s;
    s.config.degree = 2;
    s.config.alpha = 1.0;
    s.config.epsilon = 0.1;
    s.name = "spread " + std::to_string(i);
    s.reference = gen.sample(2000, 0);
    Dataset target = gen.sample(2000, 1);
    Rng rng(seed, 3);
    for (std::size_t r = 0; r < 200 * static_cast<std::size_t>(i + 1) && r < target.size(); ++r) {
      const double radius = 3.0 + 6.0 * rng.uniform();
      const double angle = 2.0 * std::numbers::pi * rng.uniform();
      target.points(static_cast<Eigen::Index>(r), 0) = radius * std::cos(angle);
      target.points(static_cast<Eigen::Index>(r), 1) = radius * std::sin(angle);
    }
    s.target = std::move(target);
    scenarios.push_back(std::move(s));
  }
  std::size_t good = 0;
  std::size_t max_rounds = 0;
  double tightest = 0.0;
  for (const auto& s : scenarios) {
    const FilterOutcome o = run_filter(s.reference, s.target, s.config);
    const double t = static_cast<double>(o.parameters.basis_size);
    const double practical = 10.0 * t * std::log2(o.parameters.clip_bound * t);
    const double i_max = static_cast<double>(o.rounds.size());
    max_rounds = std::max(max_rounds, o.rounds.size());
    tightest = std::max(tightest, i_max / practical);
    good += (o.rounds.size() <= s.target.size() && i_max <= practical) ? 1 : 0;
  }
  return {6, "", good == scenarios.size(),
          count_of(good, scenarios.size()) + " runs within bounds, max i_max " + std::to_string(max_rounds) +
              ", max i_max / (10 t log2(B0 t)) " + fmt(tightest),
          "every run: i_max <= N and i_max <= 10 t log2(B0 t)"};
}

// ---------------------------------------------------------------- 7

CriterionResult parameter_recovery() {
  const int d = 10;
  const double tau = 0.5;
  int good = 0;
  double worst_w = 0.0;
  double worst_tau = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t seed = derive_seed(707, static_cast<std::uint64_t>(trial));
    const std::vector<double> w = unit_vector(d, seed);
    const LabeledDataset s = label(Generator::gaussian(d, seed).sample(100000), Concept::halfspace(w, tau));
    const Halfspace h = recover_halfspace(s);
    const double dw = (h.w - Eigen::Map<const Eigen::VectorXd>(w.data(), d)).norm();
    const double dt = std::abs(h.tau - tau);
    worst_w = std::max(worst_w, dw);
    worst_tau = std::max(worst_tau, dt);
    good += (dw <= 0.1 && dt <= 0.1) ? 1 : 0;
  }
  return {7, "", good >= 18,
          count_of(static_cast<std::size_t>(good), 20) + " trials, worst |w-w*| " + fmt(worst_w) + ", worst |tau-tau*| " +
              fmt(worst_tau),
          ">= 18/20 trials with |w-w*| <= 0.1 and |tau-tau*| <= 0.1"};
}

// ---------------------------------------------------------------- 8

CriterionResult amplification() {
  // Grid step eps/2 with eps = 1: inliers on {-1, -0.5, 0, 0.5, 1}, the two
  // outliers anywhere on {-20, ..., 20}. Outliers are placed first so that
  // index tie-breaking favours them.
  const auto start = Clock::now();
  const double eps = 1.0;
  std::vector<Eigen::VectorXd> cand(11, Eigen::VectorXd::Zero(1));
  std::size_t configs = 0;
  std::size_t good = 0;
  double worst = 0.0;
  std::array<int, 9> in{};
  // Non-decreasing inlier position indices enumerate the multisets.
  const std::function<void(int, int)> inliers = [&](int slot, int from) {
    if (slot == 9) {
      for (int a = 0; a <= 80; ++a) {
        for (int b = a; b <= 80; ++b) {
          cand[0][0] = (a - 40) * eps / 2.0;
          cand[1][0] = (b - 40) * eps / 2.0;
          for (int i = 0; i < 9; ++i) cand[static_cast<std::size_t>(i + 2)][0] = (in[static_cast<std::size_t>(i)] - 2) * eps / 2.0;
          const double out = cand[amplify_index(cand)][0];
          worst = std::max(worst, std::abs(out));
          ++configs;
          good += std::abs(out) <= 5.0 * eps ? 1 : 0;
        }
      }
      return;
    }
    for (int p = from; p < 5; ++p) {
      in[static_cast<std::size_t>(slot)] = p;
      inliers(slot + 1, p);
    }
  };
  inliers(0, 0);
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return {8, "", good == configs && seconds <= 5.0,
          count_of(good, configs) + " configurations within 5 eps (worst " + fmt(worst) + " eps), " + fmt(seconds, 3) +
              " s",
          "100% of configurations within 5 eps, runtime <= 5 s"};
}

// ---------------------------------------------------------------- 9

CriterionResult pq_halfspaces() {
  const int d = 5;
  const double eps = 0.1;
  const std::size_t n_train = 100000;
  const std::size_t n_test = 20000;
  const double clean_bound = eps + hoeffding_slack(n_test);
  LearnerConstants constants;
  constants.c3 = 1.0;
  int good_b = 0;
  int good_a = 0;
  int dispatched_a = 0;
  double worst_err = 0.0;
  double worst_rej = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t seed = derive_seed(909, static_cast<std::uint64_t>(trial));
    const std::vector<double> w = unit_vector(d, seed);
    std::vector<double> shift(d, 0.0);
    shift[0] = 2.0;
    for (int bias_case = 0; bias_case < 2; ++bias_case) {
      const Concept f = Concept::halfspace(w, bias_case == 0 ? 0.0 : 10.0);
      const Generator train_gen = Generator::gaussian(d, seed + 1);
      const LabeledDataset train = label(train_gen.sample(n_train, 0), f);
      const LabeledDataset test = label(Generator::mean_shift(shift, seed + 2).sample(n_test), f);
      const PqOutput out = pq_learn_halfspace(train, test.x, eps, 0.1, constants);
      const double err = selected_error(out.h, out.g, test);
      const double rej = rejection_rate(out.g, train_gen.sample(n_test, 1));
      worst_err = std::max(worst_err, err);
      worst_rej = std::max(worst_rej, rej);
      const bool ok = err <= eps && rej <= clean_bound;
      if (bias_case == 0) {
        good_b += ok ? 1 : 0;
      } else {
        const bool branch_a = out.diagnostics.branch == PqBranch::LowFrequency;
        dispatched_a += branch_a ? 1 : 0;
        good_a += (ok && branch_a) ? 1 : 0;
      }
    }
  }
  return {9, "", good_b >= 18 && good_a >= 18,
          "tau*=0: " + count_of(static_cast<std::size_t>(good_b), 20) + ", tau*=10: " +
              count_of(static_cast<std::size_t>(good_a), 20) + " (low-frequency branch " +
              count_of(static_cast<std::size_t>(dispatched_a), 20) + "); worst selected error " + fmt(worst_err) +
              ", worst clean rejection " + fmt(worst_rej),
          ">= 18/20 per case with selected error <= 0.1 and clean rejection <= " + fmt(clean_bound)};
}

// ---------------------------------------------------------------- 10

Concept depth_two_tree() {
  // x1 > 0 ? (x3 > 0 ? +1 : -1) : (x2 > 0 ? -1 : +1): four leaves.
  Concept::DecisionTree tree;
  tree.nodes = {{0, 1, 2, 1}, {1, 3, 4, 1}, {2, 5, 6, 1}, {-1, -1, -1, 1}, {-1, -1, -1, -1}, {-1, -1, -1, -1},
                {-1, -1, -1, 1}};
  return Concept(std::move(tree));
}

CriterionResult pq_sandwich() {
  const int d = 8;
  const double eps = 0.1;
  const double eta = 0.2;
  const double lambda = 0.05;
  const std::size_t n = 20000;
  const double rej_bound = eta + hoeffding_slack(n);
  const double err_bound = 5.0 * lambda / eta + eps;
  const Concept tree = depth_two_tree();
  ReasonablePairConfig pair = make_reasonable_pair({ConceptClassTag::DecisionTree, 4, 1}, eps, d, Domain::Hypercube, 0.1);
  pair.degree = 4;
  pair.coefficient_bound = std::pow(static_cast<double>(basis_size(d, 4, Domain::Hypercube)), 2.0);
  const int trials = 10;
  int good = 0;
  double worst_err = 0.0;
  double worst_rej = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t seed = derive_seed(1010, static_cast<std::uint64_t>(trial));
    const Generator gen = Generator::hypercube(d, seed);
    const LabeledDataset train = label(gen.sample(n, 0), tree);
    const Corruption test = corrupt(label(gen.sample(n, 1), tree),
                                    Adversary::replace_corner(lambda, seed + 1).with_labels(Adversary::ReplacementLabel::Flip));
    const PqOutput out = pq_learn_sandwich(train, test.data.x, pair, eps, eta, 0.1);
    const double err = selected_error(out.h, out.g, test.data);
    const double rej = rejection_rate(out.g, gen.sample(n, 2));
    worst_err = std::max(worst_err, err);
    worst_rej = std::max(worst_rej, rej);
    good += (err <= err_bound && rej <= rej_bound) ? 1 : 0;
  }
  return {10, "", good >= 9,
          count_of(static_cast<std::size_t>(good), trials) + " trials (k=" + std::to_string(pair.degree) +
              "), worst selected error " + fmt(worst_err) + ", worst clean rejection " + fmt(worst_rej),
          ">= 90% of trials with rejection <= " + fmt(rej_bound) + " and selected error <= " + fmt(err_bound)};
}

// ---------------------------------------------------------------- 11

CriterionResult tds() {
  const int d = 3;
  const double eps = 0.1;
  const double theta = 0.05;
  const std::size_t n = 10000;
  ConceptClass custom;
  custom.tag = ConceptClassTag::Custom;
  custom.custom_degree = 3;
  custom.custom_coefficient_bound = 400.0;
  custom.custom_sample_size = 1000;
  const ReasonablePairConfig pair = make_reasonable_pair(custom, eps, d, Domain::Real, 0.1);
  const int trials = 20;
  int accepted_same = 0;
  int sound_far = 0;
  int rejected_far = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t seed = derive_seed(1111, static_cast<std::uint64_t>(trial));
    const std::vector<double> w = unit_vector(d, seed);
    const auto f = std::make_shared<const Concept>(Concept::halfspace(w, 0.3));
    const Generator gen = Generator::gaussian(d, seed);
    const LabeledDataset train = label(gen.sample(n, 0), *f);

    const TdsOutput same = tds_learn(train, gen.sample(n, 1), pair, eps, theta, 0.1);
    accepted_same += same.verdict == Verdict::Accept ? 1 : 0;

    const std::vector<double> far = {20.0, 20.0, 20.0};
    const Generator far_gen = Generator::point_mass_mixture(gen, far, 0.5, seed + 5);
    const Concept flipped(Concept::Flipped{f, far, 1.0});
    const LabeledDataset test = label(far_gen.sample(n, 0), flipped);
    const TdsOutput out = tds_learn(train, test.x, pair, eps, theta, 0.1);
    // The shared concept f errs exactly on the far mass.
    const double lambda = planted_lambda(*f, flipped, far_gen, 100000);
    const bool ok = out.verdict == Verdict::Reject || error_rate(*out.h, test) <= 5.0 * lambda + 2.0 * theta + eps;
    rejected_far += out.verdict == Verdict::Reject ? 1 : 0;
    sound_far += ok ? 1 : 0;
  }
  return {11, "", accepted_same >= 18 && sound_far == trials,
          "identical: accepted " + count_of(static_cast<std::size_t>(accepted_same), trials) + "; far mass: sound " +
              count_of(static_cast<std::size_t>(sound_far), trials) + " (rejected " +
              count_of(static_cast<std::size_t>(rejected_far), trials) + ")",
          "identical accepted >= 90%; far mass rejects or error <= 5 lambda + 2 theta + eps in 100%"};
}

// ---------------------------------------------------------------- 12

CriterionResult testable() {
  const int d = 8;
  const double eps = 0.1;
  const double theta = 0.05;
  const double opt = 0.1;
  const double bound = opt + 2.0 * theta + eps;
  const std::size_t n = 10000;
  ConceptClass custom;
  custom.tag = ConceptClassTag::Custom;
  custom.custom_degree = 2;
  custom.custom_coefficient_bound = 37.0 * 37.0;
  custom.custom_sample_size = 1000;
  const ReasonablePairConfig pair = make_reasonable_pair(custom, eps, d, Domain::Hypercube, 0.1);
  const Concept tree = depth_two_tree();
  const int trials = 10;
  int good = 0;
  int accepted = 0;
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t seed = derive_seed(1212, static_cast<std::uint64_t>(trial));
    const Generator gen = Generator::hypercube(d, seed);
    const LabeledDataset labeled =
        corrupt(label(gen.sample(n, 0), tree), Adversary::label_flip(opt, seed + 1)).data;
    const TdsOutput out = testable_learn(labeled, gen.sample(n, 1), pair, eps, theta, 0.1);
    if (out.verdict != Verdict::Accept) continue;
    ++accepted;
    const LabeledDataset fresh =
        corrupt(label(gen.sample(n, 2), tree), Adversary::label_flip(opt, seed + 2)).data;
    const double err = error_rate(*out.h, fresh);
    worst = std::max(worst, err);
    good += err <= bound ? 1 : 0;
  }
  return {12, "", good >= 9,
          count_of(static_cast<std::size_t>(good), trials) + " trials (accepted " +
              count_of(static_cast<std::size_t>(accepted), trials) + "), worst error " + fmt(worst),
          ">= 90% of trials accepted with error <= " + fmt(bound)};
}

// ---------------------------------------------------------------- 13

CriterionResult nasty() {
  const int d = 8;
  const double eps = 0.1;
  const double eta = 0.05;
  const double bound = 4.0 * eta + eps;
  const std::size_t n = 10000;
  ConceptClass custom;
  custom.tag = ConceptClassTag::Custom;
  custom.custom_degree = 2;
  custom.custom_coefficient_bound = 37.0 * 37.0;
  custom.custom_sample_size = 1000;
  const ReasonablePairConfig pair = make_reasonable_pair(custom, eps, d, Domain::Hypercube, 0.1);
  const Concept f = Concept::halfspace({1.0, 0.8, 0.6, 0.4, 0.3, 0.2, 0.1, 0.05}, 0.1);
  int good = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t seed = derive_seed(1313, static_cast<std::uint64_t>(trial));
    const Generator gen = Generator::hypercube(d, seed);
    const LabeledDataset data =
        corrupt(label(gen.sample(n, 0), f),
                Adversary::replace_corner(eta, seed + 1).with_labels(Adversary::ReplacementLabel::Flip))
            .data;
    const NastyOutput out = nasty_learn(data, gen.sample(n, 1), pair, eps, 0.1);
    const double err = error_rate(out.h, label(gen.sample(n, 2), f));
    worst = std::max(worst, err);
    good += err <= bound ? 1 : 0;
  }
  return {13, "", good >= 18, count_of(static_cast<std::size_t>(good), 20) + " trials, worst error " + fmt(worst),
          ">= 18/20 trials with error <= " + fmt(bound)};
}

// ---------------------------------------------------------------- 14

CriterionResult oracle_equivalences() {
  std::size_t checks = 0;
  std::size_t good = 0;
  double worst_ratio_gap = 0.0;
  // Max-ratio polynomial against random search, t = 3 and t = 6.
  for (int dim_case = 0; dim_case < 2; ++dim_case) {
    const BasisPtr basis = make_basis(2, dim_case + 1, Domain::Real);
    const auto t = static_cast<Eigen::Index>(basis->size());
    for (int inst = 0; inst < 3; ++inst) {
      Rng rng(derive_seed(1414, static_cast<std::uint64_t>(10 * dim_case + inst)), 0);
      Eigen::MatrixXd a(t, t);
      Eigen::MatrixXd b(t, t);
      for (Eigen::Index i = 0; i < t; ++i) {
        for (Eigen::Index j = 0; j < t; ++j) {
          a(i, j) = rng.normal();
          b(i, j) = rng.normal();
        }
      }
      const Eigen::MatrixXd m = a * a.transpose() / static_cast<double>(t) + Eigen::MatrixXd::Identity(t, t);
      const Eigen::MatrixXd q = b * b.transpose() / static_cast<double>(t);
      const MaxRatioResult r = max_ratio_polynomial(MomentMatrix(basis, m), q);
      const double search = random_search_ratio(m, q, 1000000, derive_seed(1415, static_cast<std::uint64_t>(inst)));
      const double gap = std::abs(r.value - search) / r.value;
      worst_ratio_gap = std::max(worst_ratio_gap, gap);
      ++checks;
      good += gap <= 0.01 ? 1 : 0;
    }
  }
  // Disagreement region closed form against a grid over the parameter ball.
  std::size_t grid_checks = 0;
  std::size_t grid_good = 0;
  {
    Rng rng(1416, 0);
    const double radius = 0.3;
    for (int inst = 0; inst < 200; ++inst) {
      const double angle = 2.0 * std::numbers::pi * rng.uniform();
      const Eigen::Vector2d w(std::cos(angle), std::sin(angle));
      const double tau = rng.normal() * 0.5;
      const Eigen::Vector2d x(1.5 * rng.normal(), 1.5 * rng.normal());
      const DisagreementSelector g(w, tau, radius);
      const double ratio = std::abs(w.dot(x) + tau) / (radius * (x.norm() + 1.0));
      if (std::abs(ratio - 1.0) < 1e-3) continue;  // closer to the boundary than the grid resolves
      ++grid_checks;
      const bool closed = g.evaluate({x.data(), 2}) == 0;
      grid_good += closed == grid_disagreement(w, tau, radius, x, 720, 20) ? 1 : 0;
    }
  }
  // Realizable parity truth table.
  bool table_exact = true;
  {
    Dataset cube;
    cube.domain = Domain::Hypercube;
    cube.points.resize(16, 4);
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 4; ++j) cube.points(i, j) = ((i >> j) & 1) ? 1.0 : -1.0;
    }
    LabeledDataset data{cube, {}};
    for (int i = 0; i < 16; ++i) data.y.push_back(cube.points(i, 0) * cube.points(i, 1) > 0 ? 1 : -1);
    RegressionConfig rc;
    rc.degree = 2;
    rc.coefficient_bound = 11.0 * 11.0;
    const L1RegressionResult fit = l1_regression_with_threshold(data, rc);
    for (int i = 0; i < 16; ++i) table_exact = table_exact && fit.hypothesis.predict(cube.row(static_cast<std::size_t>(i))) == data.y[static_cast<std::size_t>(i)];
  }
  return {14, "", good == checks && grid_good == grid_checks && table_exact,
          "max-ratio " + count_of(good, checks) + " (worst gap " + fmt(worst_ratio_gap) + "), disagreement " +
              count_of(grid_good, grid_checks) + ", truth table " + (table_exact ? "exact" : "wrong"),
          "100% agreement: random search within 1%, grid search identical, 16/16 inputs"};
}

// ---------------------------------------------------------------- 15

const std::vector<std::pair<experiments::Command, std::string>>& determinism_configs() {
  static const std::vector<std::pair<experiments::Command, std::string>> configs = {
      {experiments::Command::Filter, R"({
        "trials": 2, "seed": 3,
        "train": {"generator": {"kind": "gaussian", "dim": 2}, "n": 2000},
        "test": {"generator": {"kind": "gaussian", "dim": 2}, "n": 2000,
                 "adversary": {"kind": "replace", "rate": 0.1, "factory": "fixed", "point": [6, 6]}},
        "filter": {"degree": 2, "epsilon": 0.1, "alpha": 0.5}})"},
      {experiments::Command::Pq, R"({
        "trials": 2, "seed": 4,
        "train": {"generator": {"kind": "gaussian", "dim": 3}, "n": 5000,
                  "concept": {"kind": "halfspace", "w": [1, 0, 0], "tau": 0}},
        "test": {"generator": {"kind": "mean_shift", "mean": [2, 0, 0]}, "n": 2000},
        "learner": {"kind": "halfspace", "epsilon": 0.1, "delta": 0.1}})"},
      {experiments::Command::Tds, R"({
        "trials": 2, "seed": 5,
        "train": {"generator": {"kind": "gaussian", "dim": 2}, "n": 3000,
                  "concept": {"kind": "halfspace", "w": [0.6, 0.8], "tau": 0.2}},
        "test": {"generator": {"kind": "gaussian", "dim": 2}, "n": 3000},
        "learner": {"epsilon": 0.1, "theta": 0.05, "pair": {"class": "custom", "degree": 2}}})"},
      {experiments::Command::Testable, R"({
        "trials": 2, "seed": 6,
        "train": {"generator": {"kind": "hypercube", "dim": 4}, "n": 3000,
                  "concept": {"kind": "tree", "nodes": [{"var": 0, "left": 1, "right": 2}, {"value": -1}, {"value": 1}]},
                  "adversary": {"kind": "label_flip", "rate": 0.1}},
        "learner": {"epsilon": 0.1, "theta": 0.05, "pair": {"class": "custom", "degree": 2, "sample_size": 200}}})"},
      {experiments::Command::Nasty, R"({
        "trials": 2, "seed": 7,
        "train": {"generator": {"kind": "hypercube", "dim": 4}, "n": 3000,
                  "concept": {"kind": "halfspace", "w": [1, 0.5, 0.25, 0.1], "tau": 0},
                  "adversary": {"kind": "replace", "rate": 0.05, "factory": "corner", "labels": "flip"}},
        "learner": {"epsilon": 0.1, "pair": {"class": "custom", "degree": 2}}})"},
  };
  return configs;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

CriterionResult cli_determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("shiftguard-determinism-" + std::to_string(::getpid()));
  fs::create_directories(root);
  std::size_t identical = 0;
  std::string detail;
  const auto& configs = determinism_configs();
  for (const auto& [command, text] : configs) {
    const std::string name(experiments::to_string(command));
    const fs::path config_path = root / (name + ".json");
    std::ofstream(config_path) << text;
    std::array<std::string, 2> reports;
    std::array<std::string, 2> series;
    bool ran = true;
    for (int run = 0; run < 2; ++run) {
      experiments::RunOptions options;
      options.out_dir = root / (name + "-" + std::to_string(run));
      options.jobs = run == 0 ? 1 : 2;
      std::ostringstream err;
      const int code = experiments::execute_command(command, config_path, options, err);
      ran = ran && code == 0;
      reports[static_cast<std::size_t>(run)] = read_file(options.out_dir / "report.json");
      series[static_cast<std::size_t>(run)] = read_file(options.out_dir / "series.csv");
    }
    const bool same = ran && !reports[0].empty() && reports[0] == reports[1] && series[0] == series[1];
    identical += same ? 1 : 0;
    if (!same) detail += " " + name + (ran ? " differs" : " failed");
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  return {15, "", identical == configs.size(),
          count_of(identical, configs.size()) + " subcommands byte-identical across reruns (jobs 1 vs 2)" + detail,
          "every subcommand: identical config and seed give byte-identical reports"};
}

}  // namespace

std::vector<Criterion> acceptance_suite() {
  return {
      {1, "moment estimator bracket", moment_bracket},
      {2, "stopping soundness", stopping_soundness},
      {3, "clean validity", clean_validity},
      {4, "adversarial validity", adversarial_validity},
      {5, "smoothness completeness", smoothness_completeness},
      {6, "iteration bounds", iteration_bounds},
      {7, "halfspace parameter recovery", parameter_recovery},
      {8, "amplification", amplification},
      {9, "PQ halfspaces end to end", pq_halfspaces},
      {10, "PQ via sandwiching", pq_sandwich},
      {11, "TDS completeness and soundness", tds},
      {12, "tolerant testable learning", testable},
      {13, "nasty noise", nasty},
      {14, "oracle equivalences", oracle_equivalences},
      {15, "CLI determinism", cli_determinism},
  };
}

const Criterion& acceptance_criterion(int id) {
  static const std::vector<Criterion> suite = acceptance_suite();
  for (const auto& c : suite) {
    if (c.id == id) return c;
  }
  throw std::invalid_argument("no acceptance criterion " + std::to_string(id));
}

std::vector<std::string> suite_names() { return {"acceptance"}; }

CriterionResult run_criterion(const Criterion& c) {
  const auto start = Clock::now();
  CriterionResult r = c.run();
  r.id = c.id;
  r.title = c.title;
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream out;
  out << "[" << std::setw(2) << r.id << "] " << (r.passed ? "PASS" : "FAIL") << "  " << r.title << ": " << r.measured
      << "  (target: " << r.target << ")  " << std::fixed << std::setprecision(1) << r.seconds << " s";
  return out.str();
}

SuiteOutcome run_suite(std::string_view name, std::ostream& table) {
  if (name != "acceptance") throw std::invalid_argument("unknown suite '" + std::string(name) + "'");
  SuiteOutcome outcome;
  outcome.report = {{"suite", name}, {"criteria", json::array()}};
  for (const auto& c : acceptance_suite()) {
    CriterionResult r = run_criterion(c);
    table << format_result(r) << std::endl;
    outcome.all_passed = outcome.all_passed && r.passed;
    outcome.report["criteria"].push_back(
        {{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"measured", r.measured}, {"target", r.target}});
    outcome.results.push_back(std::move(r));
  }
  outcome.report["all_passed"] = outcome.all_passed;
  return outcome;
}

}  // namespace shiftguard::bench
