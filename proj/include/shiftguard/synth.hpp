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
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "shiftguard/dataset.hpp"

namespace shiftguard {

/// Counter-based SplitMix64 stream. Output i of stream (seed, stream) is a
/// pure function of the three integers, so trials can be generated in any
/// order or concurrently.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_normal_;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

/// Seed for stream `index` derived from a parent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

class Generator {
 public:
  enum class Kind { GaussianStd, HypercubeUniform, MeanShiftGaussian, PointMassMixture, ConditionedHalf };

  static Generator gaussian(int dim, std::uint64_t seed);
  static Generator hypercube(int dim, std::uint64_t seed);
  static Generator mean_shift(std::vector<double> mean, std::uint64_t seed);
  /// With probability `mass` the point, otherwise a base sample.
  static Generator point_mass_mixture(const Generator& base, std::vector<double> point, double mass,
                                      std::uint64_t seed);
  /// Base samples conditioned on direction . x > 0 (rejection sampling).
  static Generator conditioned_half(const Generator& base, std::vector<double> direction, std::uint64_t seed);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  Domain domain() const;
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& vector_parameter() const { return vec_; }
  double mass() const { return mass_; }
  const Generator* base() const { return base_.get(); }
  Generator with_seed(std::uint64_t seed) const;

  /// Closed-form total variation distance to the base distribution (the
  /// standard Gaussian for a mean shift); 0 for the base distributions.
  double total_variation_to_base() const;

  /// N points from stream `stream` of this generator's seed.
  Dataset sample(std::size_t n, std::uint64_t stream = 0) const;
  void sample_point(Rng& rng, std::span<double> out) const;

 private:
  Generator(Kind kind, int dim, std::uint64_t seed) : kind_(kind), dim_(dim), seed_(seed) {}

  Kind kind_;
  int dim_;
  std::uint64_t seed_;
  std::vector<double> vec_;  // mean, point, or direction
  double mass_ = 0.0;
  std::shared_ptr<const Generator> base_;
};

Dataset sample(const Generator& generator, std::size_t n, std::uint64_t stream = 0);

/// Standard normal CDF.
double normal_cdf(double x);

class Concept {
 public:
  struct Halfspace {
    std::vector<double> w;
    double tau = 0.0;
  };
  struct Intersection {
    std::vector<Halfspace> halfspaces;
  };
  /// Internal node: x[var] > 0 goes to `right`, otherwise `left`.
  /// Leaf: var < 0, output `value`.
  struct TreeNode {
    int var = -1;
    int left = -1;
    int right = -1;
    int value = 1;
  };
  struct DecisionTree {
    std::vector<TreeNode> nodes;  // root at index 0
  };
  struct Constant {
    int value = 1;
  };
  /// Base concept with labels flipped inside a Euclidean ball.
  struct Flipped {
    std::shared_ptr<const Concept> base;
    std::vector<double> center;
    double radius = 0.0;
  };
  using Variant = std::variant<Halfspace, Intersection, DecisionTree, Constant, Flipped>;

  Concept(Variant v);
  static Concept halfspace(std::vector<double> w, double tau);
  static Concept constant(int value);

  const Variant& variant() const { return v_; }
  int operator()(std::span<const double> x) const;
  /// Number of leaves of a decision tree, 0 otherwise.
  std::size_t leaf_count() const;

 private:
  Variant v_;
};

LabeledDataset label(const Dataset& data, const Concept& target);

class Adversary {
 public:
  enum class Kind { None, ReplaceFraction, LabelFlipFraction };
  enum class Factory { FixedPoint, FarDirection, HypercubeCorner };
  enum class ReplacementLabel { Keep, Flip, Positive, Negative };

  static Adversary none();
  static Adversary label_flip(double rate, std::uint64_t seed);
  static Adversary replace_fixed(double rate, std::vector<double> point, std::uint64_t seed);
  /// Random unit directions scaled until the degree-k feature vector has
  /// Euclidean norm 100 sqrt(clip_bound).
  static Adversary replace_far(double rate, int degree, double clip_bound, std::uint64_t seed);
  /// One random corner of the hypercube, replicated.
  static Adversary replace_corner(double rate, std::uint64_t seed);
  Adversary with_labels(ReplacementLabel mode) const;

  Kind kind() const { return kind_; }
  Factory factory() const { return factory_; }
  double rate() const { return rate_; }
  std::uint64_t seed() const { return seed_; }
  ReplacementLabel replacement_label() const { return label_mode_; }
  const std::vector<double>& point() const { return point_; }
  int degree() const { return degree_; }
  double clip_bound() const { return clip_bound_; }

 private:
  Kind kind_ = Kind::None;
  Factory factory_ = Factory::FixedPoint;
  double rate_ = 0.0;
  std::uint64_t seed_ = 0;
  ReplacementLabel label_mode_ = ReplacementLabel::Keep;
  std::vector<double> point_;
  int degree_ = 1;
  double clip_bound_ = 1.0;
};

struct Corruption {
  LabeledDataset data;
  std::vector<bool> mask;
  std::vector<std::size_t> indices;  // ascending
};

/// Exactly floor(rate * N) indices, chosen by a seeded shuffle, are replaced
/// or have their label flipped.
Corruption corrupt(const LabeledDataset& data, const Adversary& adversary);
/// Unlabeled variant; label flipping leaves points unchanged.
Corruption corrupt(const Dataset& data, const Adversary& adversary);

/// Scalar c with ||phi(c u)|| = target for the degree-k real monomial features.
double scale_to_feature_norm(std::span<const double> direction, int degree, double target);

/// Monte-Carlo estimate of Pr_{x ~ test}[train_concept(x) != test_concept(x)],
/// an upper bound on lambda through the shared concept train_concept.
double planted_lambda(const Concept& train_concept, const Concept& test_concept, const Generator& test_generator,
                      std::size_t samples = 100000, std::uint64_t stream = 0x1a4bdaULL);

}  // namespace shiftguard
