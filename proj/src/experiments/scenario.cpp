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

#include "shiftguard/experiments/scenario.hpp"

#include <cmath>

namespace shiftguard::experiments {

namespace {

std::vector<double> vec(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key).get<std::vector<double>>();
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

double rate_field(const json& j, const char* key, double fallback) {
  const double v = j.value(key, fallback);
  if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string("'") + key + "' must lie in (0, 1)");
  return v;
}

Generator parse_generator(const json& j, std::uint64_t seed) {
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "gaussian") return Generator::gaussian(field(j, "dim").get<int>(), seed);
  if (kind == "hypercube") return Generator::hypercube(field(j, "dim").get<int>(), seed);
  if (kind == "mean_shift") return Generator::mean_shift(vec(j, "mean"), seed);
  if (kind == "point_mass") {
    return Generator::point_mass_mixture(parse_generator(field(j, "base"), seed), vec(j, "point"),
                                         field(j, "mass").get<double>(), seed);
  }
  if (kind == "conditioned_half") {
    return Generator::conditioned_half(parse_generator(field(j, "base"), seed), vec(j, "direction"), seed);
  }
  throw ConfigError("unknown generator kind '" + kind + "'");
}

Concept parse_concept(const json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "halfspace") return Concept::halfspace(vec(j, "w"), j.value("tau", 0.0));
  if (kind == "constant") return Concept::constant(field(j, "value").get<int>());
  if (kind == "intersection") {
    Concept::Intersection in;
    for (const auto& h : field(j, "halfspaces")) in.halfspaces.push_back({vec(h, "w"), h.value("tau", 0.0)});
    return Concept(std::move(in));
  }
  if (kind == "tree") {
    Concept::DecisionTree tree;
    for (const auto& n : field(j, "nodes")) {
      Concept::TreeNode node;
      if (n.contains("value")) {
        node.value = n.at("value").get<int>();
      } else {
        node.var = field(n, "var").get<int>();
        node.left = field(n, "left").get<int>();
        node.right = field(n, "right").get<int>();
      }
      tree.nodes.push_back(node);
    }
    return Concept(std::move(tree));
  }
  if (kind == "flipped") {
    return Concept(Concept::Flipped{std::make_shared<const Concept>(parse_concept(field(j, "base"))),
                                    vec(j, "center"), field(j, "radius").get<double>()});
  }
  throw ConfigError("unknown concept kind '" + kind + "'");
}

Adversary parse_adversary(const json& j, std::uint64_t seed, int default_degree, double default_clip_bound) {
  const std::string kind = j.value("kind", "none");
  if (kind == "none") return Adversary::none();
  const double rate = field(j, "rate").get<double>();
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("adversary rate must lie in [0, 1]");
  if (kind == "label_flip") return Adversary::label_flip(rate, seed);
  if (kind != "replace") throw ConfigError("unknown adversary kind '" + kind + "'");
  const std::string factory = j.value("factory", "far");
  Adversary a;
  if (factory == "fixed") {
    a = Adversary::replace_fixed(rate, vec(j, "point"), seed);
  } else if (factory == "far") {
    a = Adversary::replace_far(rate, j.value("degree", default_degree), j.value("clip_bound", default_clip_bound),
                               seed);
  } else if (factory == "corner") {
    a = Adversary::replace_corner(rate, seed);
  } else {
    throw ConfigError("unknown point factory '" + factory + "'");
  }
  const std::string labels = j.value("labels", "keep");
  if (labels == "keep") return a.with_labels(Adversary::ReplacementLabel::Keep);
  if (labels == "flip") return a.with_labels(Adversary::ReplacementLabel::Flip);
  if (labels == "positive") return a.with_labels(Adversary::ReplacementLabel::Positive);
  if (labels == "negative") return a.with_labels(Adversary::ReplacementLabel::Negative);
  throw ConfigError("unknown replacement label mode '" + labels + "'");
}

FilterConfig parse_filter_config(const json& j) {
  FilterConfig c;
  if (j.is_null()) return c;
  c.degree = j.value("degree", c.degree);
  if (c.degree < 1) throw ConfigError("filter degree must be at least 1");
  c.epsilon = rate_field(j, "epsilon", c.epsilon);
  c.alpha = j.value("alpha", c.alpha);
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError("'alpha' must lie in (0, 1]");
  c.delta = rate_field(j, "delta", c.delta);
  if (j.contains("clip_bound")) c.clip_bound_override = j.at("clip_bound").get<double>();
  if (j.contains("slack")) c.slack_override = j.at("slack").get<double>();
  c.max_rounds = j.value("max_rounds", std::size_t{0});
  return c;
}

LearnerConstants parse_constants(const json& j) {
  LearnerConstants c;
  if (j.is_null()) return c;
  c.c1 = j.value("c1", c.c1);
  c.c2 = j.value("c2", c.c2);
  c.c3 = j.value("c3", c.c3);
  c.c_tds = j.value("c_tds", c.c_tds);
  c.c_testable = j.value("c_testable", c.c_testable);
  for (double v : {c.c1, c.c2, c.c3, c.c_tds, c.c_testable}) {
    if (!(v > 0.0)) throw ConfigError("learner constants must be positive");
  }
  return c;
}

ReasonablePairConfig parse_pair(const json& j, double epsilon, int dim, Domain domain, double delta) {
  ConceptClass cls;
  cls.tag = concept_class_from_string(j.value("class", "custom"));
  cls.size = j.value("size", 1);
  cls.count = j.value("count", 1);
  if (cls.tag == ConceptClassTag::Custom) {
    cls.custom_degree = field(j, "degree").get<int>();
    cls.custom_coefficient_bound = j.value("coefficient_bound", std::pow(basis_size(dim, cls.custom_degree, domain), 2.0));
    cls.custom_sample_size = j.value("sample_size", std::size_t{1});
  }
  const SandwichParameters p =
      sandwich_degree_lookup(cls, epsilon, dim, domain, delta, j.value("lookup_constant", 1.0));
  ReasonablePairConfig pair{cls, epsilon, p.degree, p.coefficient_bound, p.sample_size};
  pair.degree = j.value("degree", pair.degree);
  if (!j.contains("coefficient_bound") && pair.degree != p.degree) {
    pair.coefficient_bound = std::pow(basis_size(dim, pair.degree, domain), 2.0);
  }
  pair.coefficient_bound = j.value("coefficient_bound", pair.coefficient_bound);
  pair.sample_size = j.value("sample_size", pair.sample_size);
  return pair;
}

SampleSpec parse_sample(const json& j, std::size_t default_n) {
  SampleSpec s;
  s.generator = field(j, "generator");
  if (j.contains("concept")) s.concept_spec = j.at("concept");
  if (j.contains("adversary")) s.adversary = j.at("adversary");
  s.n = j.value("n", default_n);
  if (s.n < 1) throw ConfigError("sample size must be at least 1");
  return s;
}

DrawnSample draw(const SampleSpec& spec, std::uint64_t trial_seed, std::uint64_t role, int default_degree,
                 double default_clip_bound) {
  const std::uint64_t gen_seed = derive_seed(trial_seed, 16 * role);
  const std::uint64_t adv_seed = derive_seed(trial_seed, 16 * role + 1);
  DrawnSample out{{}, {}, parse_generator(spec.generator, gen_seed), std::nullopt};
  const Dataset points = out.generator.sample(spec.n, 0);
  if (spec.concept_spec) {
    out.labeler = parse_concept(*spec.concept_spec);
    out.data = label(points, *out.labeler);
  } else {
    out.data.x = points;
  }
  Corruption c = corrupt(out.data, parse_adversary(spec.adversary, adv_seed, default_degree, default_clip_bound));
  out.data = std::move(c.data);
  out.corrupted = std::move(c.mask);
  return out;
}

LabeledDataset draw_fresh(const DrawnSample& base, std::size_t n, std::uint64_t stream) {
  const Dataset points = base.generator.sample(n, stream);
  if (base.labeler) return label(points, *base.labeler);
  LabeledDataset out;
  out.x = points;
  return out;
}

}  // namespace shiftguard::experiments
