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

#include "shiftguard/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "shiftguard/basis.hpp"
#include "shiftguard/errors.hpp"

namespace shiftguard {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamSalt = 0x632BE59BD9B4E019ULL;
}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64_mix(seed ^ splitmix64_mix(index + kStreamSalt + kGolden));
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : key_(splitmix64_mix(seed ^ splitmix64_mix(stream + kStreamSalt))) {}

std::uint64_t Rng::next_u64() {
  ++counter_;
  return splitmix64_mix(key_ + counter_ * kGolden);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(angle);
  return r * std::cos(angle);
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw InvalidArgument("Rng::below needs n > 0");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % static_cast<std::uint64_t>(n);
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return static_cast<std::size_t>(v % n);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Generator Generator::gaussian(int dim, std::uint64_t seed) {
  if (dim < 1) throw InvalidArgument("generator dimension must be positive");
  return Generator(Kind::GaussianStd, dim, seed);
}

Generator Generator::hypercube(int dim, std::uint64_t seed) {
  if (dim < 1) throw InvalidArgument("generator dimension must be positive");
  return Generator(Kind::HypercubeUniform, dim, seed);
}

Generator Generator::mean_shift(std::vector<double> mean, std::uint64_t seed) {
  if (mean.empty()) throw InvalidArgument("mean shift needs a nonempty mean");
  Generator g(Kind::MeanShiftGaussian, static_cast<int>(mean.size()), seed);
  g.vec_ = std::move(mean);
  return g;
}

Generator Generator::point_mass_mixture(const Generator& base, std::vector<double> point, double mass,
                                        std::uint64_t seed) {
  if (static_cast<int>(point.size()) != base.dim()) throw DimensionError("point mass dimension differs from base");
  if (!(mass >= 0.0 && mass <= 1.0)) throw InvalidArgument("point mass must lie in [0, 1]");
  if (base.domain() == Domain::Hypercube) {
    for (double v : point) {
      if (v != 1.0 && v != -1.0) throw InvalidArgument("hypercube point mass must be a corner");
    }
  }
  Generator g(Kind::PointMassMixture, base.dim(), seed);
  g.vec_ = std::move(point);
  g.mass_ = mass;
  g.base_ = std::make_shared<const Generator>(base);
  return g;
}

Generator Generator::conditioned_half(const Generator& base, std::vector<double> direction, std::uint64_t seed) {
  if (static_cast<int>(direction.size()) != base.dim()) throw DimensionError("direction dimension differs from base");
  if (base.kind() != Kind::GaussianStd && base.kind() != Kind::HypercubeUniform) {
    throw InvalidArgument("conditioning needs a standard base distribution");
  }
  Generator g(Kind::ConditionedHalf, base.dim(), seed);
  g.vec_ = std::move(direction);
  g.base_ = std::make_shared<const Generator>(base);
  return g;
}

Domain Generator::domain() const {
  switch (kind_) {
    case Kind::HypercubeUniform:
      return Domain::Hypercube;
    case Kind::PointMassMixture:
    case Kind::ConditionedHalf:
      return base_->domain();
    default:
      return Domain::Real;
  }
}

Generator Generator::with_seed(std::uint64_t seed) const {
  Generator g = *this;
  g.seed_ = seed;
  return g;
}

double Generator::total_variation_to_base() const {
  switch (kind_) {
    case Kind::MeanShiftGaussian: {
      double norm2 = 0.0;
      for (double v : vec_) norm2 += v * v;
      return 2.0 * normal_cdf(std::sqrt(norm2) / 2.0) - 1.0;
    }
    case Kind::PointMassMixture:
      // The base already puts 2^-d on a hypercube corner.
      if (base_->domain() == Domain::Hypercube) return mass_ * (1.0 - std::ldexp(1.0, -dim_));
      return mass_;
    case Kind::ConditionedHalf:
      return 0.5;
    default:
      return 0.0;
  }
}

void Generator::sample_point(Rng& rng, std::span<double> out) const {
  if (static_cast<int>(out.size()) != dim_) throw DimensionError("sample buffer has the wrong dimension");
  switch (kind_) {
    case Kind::GaussianStd:
      for (double& v : out) v = rng.normal();
      return;
    case Kind::HypercubeUniform:
      for (double& v : out) v = (rng.next_u64() >> 63) != 0 ? 1.0 : -1.0;
      return;
    case Kind::MeanShiftGaussian:
      for (int i = 0; i < dim_; ++i) out[static_cast<std::size_t>(i)] = vec_[static_cast<std::size_t>(i)] + rng.normal();
      return;
    case Kind::PointMassMixture:
      if (rng.uniform() < mass_) {
        std::copy(vec_.begin(), vec_.end(), out.begin());
      } else {
        base_->sample_point(rng, out);
      }
      return;
    case Kind::ConditionedHalf:
      while (true) {
        base_->sample_point(rng, out);
        double dot = 0.0;
        for (int i = 0; i < dim_; ++i) dot += vec_[static_cast<std::size_t>(i)] * out[static_cast<std::size_t>(i)];
        if (dot > 0.0) return;
      }
  }
}

Dataset Generator::sample(std::size_t n, std::uint64_t stream) const {
  if (n == 0) throw InvalidArgument("sample size must be at least 1");
  Rng rng(seed_, stream);
  Dataset out;
  out.domain = domain();
  out.points.resize(static_cast<Eigen::Index>(n), dim_);
  for (std::size_t i = 0; i < n; ++i) {
    sample_point(rng, {out.points.row(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(dim_)});
  }
  return out;
}

Dataset sample(const Generator& generator, std::size_t n, std::uint64_t stream) {
  return generator.sample(n, stream);
}

Concept::Concept(Variant v) : v_(std::move(v)) {
  if (const auto* tree = std::get_if<DecisionTree>(&v_)) {
    if (tree->nodes.empty()) throw InvalidArgument("decision tree needs a root");
    const int count = static_cast<int>(tree->nodes.size());
    for (int i = 0; i < count; ++i) {
      const TreeNode& node = tree->nodes[static_cast<std::size_t>(i)];
      if (node.var < 0) {
        if (node.value != 1 && node.value != -1) throw InvalidArgument("tree leaves must be +-1");
      } else if (node.left <= i || node.right <= i || node.left >= count || node.right >= count) {
        throw InvalidArgument("tree children must follow their parent");
      }
    }
  } else if (const auto* c = std::get_if<Constant>(&v_)) {
    if (c->value != 1 && c->value != -1) throw InvalidArgument("constant concept must be +-1");
  } else if (const auto* f = std::get_if<Flipped>(&v_)) {
    if (!f->base) throw InvalidArgument("flipped concept needs a base");
  }
}

Concept Concept::halfspace(std::vector<double> w, double tau) { return Concept(Halfspace{std::move(w), tau}); }

Concept Concept::constant(int value) { return Concept(Constant{value}); }

namespace {

int halfspace_value(const Concept::Halfspace& h, std::span<const double> x) {
  if (h.w.size() != x.size()) throw DimensionError("halfspace dimension differs from the point");
  double s = h.tau;
  for (std::size_t i = 0; i < x.size(); ++i) s += h.w[i] * x[i];
  return s >= 0.0 ? 1 : -1;
}

}  // namespace

int Concept::operator()(std::span<const double> x) const {
  return std::visit(
      [&](const auto& c) -> int {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Halfspace>) {
          return halfspace_value(c, x);
        } else if constexpr (std::is_same_v<T, Intersection>) {
          for (const auto& h : c.halfspaces) {
            if (halfspace_value(h, x) < 0) return -1;
          }
          return 1;
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          std::size_t at = 0;
          while (c.nodes[at].var >= 0) {
            const auto var = static_cast<std::size_t>(c.nodes[at].var);
            if (var >= x.size()) throw DimensionError("tree variable outside the point");
            at = static_cast<std::size_t>(x[var] > 0.0 ? c.nodes[at].right : c.nodes[at].left);
          }
          return c.nodes[at].value;
        } else if constexpr (std::is_same_v<T, Constant>) {
          return c.value;
        } else {
          const int base = (*c.base)(x);
          if (c.center.size() != x.size()) throw DimensionError("flip center dimension differs from the point");
          double dist2 = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i) dist2 += (x[i] - c.center[i]) * (x[i] - c.center[i]);
          return dist2 <= c.radius * c.radius ? -base : base;
        }
      },
      v_);
}

std::size_t Concept::leaf_count() const {
  const auto* tree = std::get_if<DecisionTree>(&v_);
  if (!tree) return 0;
  return static_cast<std::size_t>(
      std::count_if(tree->nodes.begin(), tree->nodes.end(), [](const TreeNode& n) { return n.var < 0; }));
}

LabeledDataset label(const Dataset& data, const Concept& target) {
  LabeledDataset out;
  out.x = data;
  out.y.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out.y[i] = target(data.row(i));
  return out;
}

Adversary Adversary::none() { return Adversary(); }

Adversary Adversary::label_flip(double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("corruption rate must lie in [0, 1]");
  Adversary a;
  a.kind_ = Kind::LabelFlipFraction;
  a.rate_ = rate;
  a.seed_ = seed;
  return a;
}

Adversary Adversary::replace_fixed(double rate, std::vector<double> point, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("corruption rate must lie in [0, 1]");
  Adversary a;
  a.kind_ = Kind::ReplaceFraction;
  a.factory_ = Factory::FixedPoint;
  a.rate_ = rate;
  a.seed_ = seed;
  a.point_ = std::move(point);
  return a;
}

Adversary Adversary::replace_far(double rate, int degree, double clip_bound, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("corruption rate must lie in [0, 1]");
  if (degree < 1 || !(clip_bound > 0.0)) throw InvalidArgument("far factory needs degree >= 1 and clip bound > 0");
  Adversary a;
  a.kind_ = Kind::ReplaceFraction;
  a.factory_ = Factory::FarDirection;
  a.rate_ = rate;
  a.seed_ = seed;
  a.degree_ = degree;
  a.clip_bound_ = clip_bound;
  return a;
}

Adversary Adversary::replace_corner(double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("corruption rate must lie in [0, 1]");
  Adversary a;
  a.kind_ = Kind::ReplaceFraction;
  a.factory_ = Factory::HypercubeCorner;
  a.rate_ = rate;
  a.seed_ = seed;
  return a;
}

Adversary Adversary::with_labels(ReplacementLabel mode) const {
  Adversary a = *this;
  a.label_mode_ = mode;
  return a;
}

double scale_to_feature_norm(std::span<const double> direction, int degree, double target) {
  const MonomialBasis basis(static_cast<int>(direction.size()), degree, Domain::Real);
  std::vector<double> x(direction.size());
  const auto norm_at = [&](double c) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = c * direction[i];
    return basis.features(x).norm();
  };
  if (norm_at(0.0) >= target) return 0.0;
  double hi = 1.0;
  while (norm_at(hi) < target) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm_at(mid) < target ? lo : hi) = mid;
  }
  return hi;
}

Corruption corrupt(const LabeledDataset& data, const Adversary& adversary) {
  Corruption out;
  out.data = data;
  const std::size_t n = data.size();
  out.mask.assign(n, false);
  if (adversary.kind() == Adversary::Kind::None || n == 0) return out;
  const bool labelled = data.y.size() == n;
  const auto count = static_cast<std::size_t>(std::floor(adversary.rate() * static_cast<double>(n)));

  Rng rng(adversary.seed(), 0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  out.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(out.indices.begin(), out.indices.end());
  for (std::size_t i : out.indices) out.mask[i] = true;

  const int d = data.dim();
  if (adversary.kind() == Adversary::Kind::LabelFlipFraction) {
    if (labelled) {
      for (std::size_t i : out.indices) out.data.y[i] = -out.data.y[i];
    }
    return out;
  }

  Rng factory_rng(adversary.seed(), 1);
  std::vector<double> corner;
  if (adversary.factory() == Adversary::Factory::HypercubeCorner) {
    corner.resize(static_cast<std::size_t>(d));
    for (double& v : corner) v = (factory_rng.next_u64() >> 63) != 0 ? 1.0 : -1.0;
  }
  if (adversary.factory() == Adversary::Factory::FixedPoint && static_cast<int>(adversary.point().size()) != d) {
    throw DimensionError("replacement point dimension differs from the data");
  }
  const double target = 100.0 * std::sqrt(adversary.clip_bound());
  std::vector<double> u(static_cast<std::size_t>(d));
  for (std::size_t i : out.indices) {
    auto row = out.data.x.points.row(static_cast<Eigen::Index>(i));
    switch (adversary.factory()) {
      case Adversary::Factory::FixedPoint:
        for (int j = 0; j < d; ++j) row[j] = adversary.point()[static_cast<std::size_t>(j)];
        break;
      case Adversary::Factory::HypercubeCorner:
        for (int j = 0; j < d; ++j) row[j] = corner[static_cast<std::size_t>(j)];
        break;
      case Adversary::Factory::FarDirection: {
        double norm2 = 0.0;
        do {
          norm2 = 0.0;
          for (double& v : u) {
            v = factory_rng.normal();
            norm2 += v * v;
          }
        } while (norm2 == 0.0);
        for (double& v : u) v /= std::sqrt(norm2);
        const double c = scale_to_feature_norm(u, adversary.degree(), target);
        for (int j = 0; j < d; ++j) row[j] = c * u[static_cast<std::size_t>(j)];
        break;
      }
    }
    if (labelled) {
      switch (adversary.replacement_label()) {
        case Adversary::ReplacementLabel::Keep:
          break;
        case Adversary::ReplacementLabel::Flip:
          out.data.y[i] = -out.data.y[i];
          break;
        case Adversary::ReplacementLabel::Positive:
          out.data.y[i] = 1;
          break;
        case Adversary::ReplacementLabel::Negative:
          out.data.y[i] = -1;
          break;
      }
    }
  }
  return out;
}

Corruption corrupt(const Dataset& data, const Adversary& adversary) {
  LabeledDataset wrapped;
  wrapped.x = data;
  return corrupt(wrapped, adversary);
}

double planted_lambda(const Concept& train_concept, const Concept& test_concept, const Generator& test_generator,
                      std::size_t samples, std::uint64_t stream) {
  if (samples == 0) return 0.0;
  Rng rng(test_generator.seed(), stream);
  std::vector<double> x(static_cast<std::size_t>(test_generator.dim()));
  std::size_t disagree = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    test_generator.sample_point(rng, x);
    if (train_concept(x) != test_concept(x)) ++disagree;
  }
  return static_cast<double>(disagree) / static_cast<double>(samples);
}

}  // namespace shiftguard
