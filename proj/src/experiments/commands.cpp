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

#include "shiftguard/experiments/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "shiftguard/experiments/scenario.hpp"
#include "shiftguard/serialize.hpp"

namespace shiftguard::experiments {

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Filter:
      return "filter";
    case Command::Pq:
      return "pq";
    case Command::Tds:
      return "tds";
    case Command::Testable:
      return "testable";
    case Command::Nasty:
      return "nasty";
  }
  return "unknown";
}

void configure_logging() {
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("SHIFTGUARD_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

json aggregate(const std::vector<TrialRecord>& records) {
  std::map<std::string, std::vector<double>> columns;
  for (const auto& r : records) {
    if (!r.ok) continue;
    for (const auto& [key, value] : r.metrics.items()) {
      if (value.is_number()) columns[key].push_back(value.get<double>());
    }
  }
  json out = json::object();
  for (const auto& [key, values] : columns) {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    out[key] = {{"count", values.size()},
                {"mean", mean},
                {"std", std::sqrt(var / n)},
                {"min", quantile(values, 0.0)},
                {"q25", quantile(values, 0.25)},
                {"median", quantile(values, 0.5)},
                {"q75", quantile(values, 0.75)},
                {"max", quantile(values, 1.0)}};
  }
  return out;
}

namespace {

constexpr std::uint64_t kTrainRole = 1;
constexpr std::uint64_t kTestRole = 2;
constexpr std::uint64_t kReferenceRole = 3;
constexpr std::uint64_t kSmoothRole = 4;
constexpr std::uint64_t kEvalRole = 5;

struct Scenario {
  Command command = Command::Filter;
  json config;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  SampleSpec train;
  SampleSpec test;
  std::optional<SampleSpec> reference;
  std::optional<SampleSpec> smooth;
  FilterConfig filter;
  json learner = json::object();
  std::string learner_kind;
  double epsilon = 0.1;
  double delta = 0.1;
  double eta = 0.1;
  double theta = 0.05;
  LearnerConstants constants;
  std::optional<ReasonablePairConfig> pair;
  int dim = 1;
  Domain domain = Domain::Real;
  int adversary_degree = 2;
  double default_clip = 1.0;
  std::size_t clean_n = 0;
  std::size_t eval_n = 0;
  bool save_outputs = false;
};

void put(json& metrics, const std::string& key, double value) {
  if (!std::isfinite(value)) {
    spdlog::warn("metric {} is not finite; omitted", key);
    return;
  }
  metrics[key] = value;
}

Scenario prepare(Command command, const json& config, const RunOptions& options) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  Scenario s;
  s.command = command;
  s.config = config;
  try {
    s.seed = options.seed.value_or(config.value("seed", std::uint64_t{0}));
    s.trials = options.trials.value_or(config.value("trials", std::size_t{1}));
    if (s.trials < 1) throw ConfigError("trial count must be at least 1");
    s.config["seed"] = s.seed;
    s.config["trials"] = s.trials;
    if (!config.contains("train")) throw ConfigError("missing field 'train'");
    s.train = parse_sample(config.at("train"), 10000);
    s.test = parse_sample(config.contains("test") ? config.at("test") : config.at("train"), s.train.n);
    if (config.contains("reference")) s.reference = parse_sample(config.at("reference"), s.train.n);
    if (config.contains("smooth")) s.smooth = parse_sample(config.at("smooth"), s.train.n);
    s.filter = parse_filter_config(config.contains("filter") ? config.at("filter") : json());
    s.learner = config.value("learner", json::object());
    s.learner_kind = s.learner.value("kind", "");
    s.epsilon = rate_field(s.learner, "epsilon", 0.1);
    s.delta = rate_field(s.learner, "delta", 0.1);
    s.eta = rate_field(s.learner, "eta", 0.1);
    s.theta = rate_field(s.learner, "theta", 0.05);
    s.constants = parse_constants(s.learner.contains("constants") ? s.learner.at("constants") : json());
    s.clean_n = config.value("clean_n", s.train.n);
    s.eval_n = config.value("eval_n", s.test.n);
    s.save_outputs = config.value("save_outputs", false);

    const Generator g = parse_generator(s.train.generator, 0);
    s.dim = g.dim();
    s.domain = g.domain();
    if (parse_generator(s.test.generator, 0).dim() != s.dim) throw ConfigError("train and test dimensions differ");
    if (s.train.concept_spec) parse_concept(*s.train.concept_spec);
    if (s.test.concept_spec) parse_concept(*s.test.concept_spec);
    if (s.reference) parse_generator(s.reference->generator, 0);
    if (s.smooth) parse_generator(s.smooth->generator, 0);

    if (command != Command::Filter && command != Command::Pq && s.learner_kind.empty()) s.learner_kind = "sandwich";
    if (command == Command::Pq && s.learner_kind.empty()) throw ConfigError("missing field 'learner.kind'");
    const bool needs_pair = command == Command::Tds || command == Command::Testable || command == Command::Nasty ||
                            s.learner_kind == "sandwich" || s.learner_kind == "adversarial";
    if (needs_pair) {
      s.pair = parse_pair(s.learner.value("pair", json::object()), s.epsilon, s.dim, s.domain, s.delta);
    }
    s.adversary_degree = s.pair ? s.pair->degree : s.filter.degree;
    const double t = static_cast<double>(basis_size(s.dim, s.adversary_degree, s.domain));
    s.default_clip = s.filter.clip_bound_override.value_or(4.0 * t * t * t / s.filter.epsilon);
    parse_adversary(s.train.adversary, 0, s.adversary_degree, s.default_clip);
    parse_adversary(s.test.adversary, 0, s.adversary_degree, s.default_clip);

    if (command == Command::Pq) {
      static const std::vector<std::string> kinds = {"halfspace", "homogeneous", "sandwich", "adversarial"};
      if (std::find(kinds.begin(), kinds.end(), s.learner_kind) == kinds.end()) {
        throw ConfigError("unknown pq learner kind '" + s.learner_kind + "'");
      }
    }
    if ((command != Command::Filter) && !s.train.concept_spec) throw ConfigError("learners need 'train.concept'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return s;
}

DrawnSample draw_role(const Scenario& s, const SampleSpec& spec, std::uint64_t trial_seed, std::uint64_t role) {
  return draw(spec, trial_seed, role, s.adversary_degree, s.default_clip);
}

Dataset reference_sample(const Scenario& s, const DrawnSample& train, std::uint64_t trial_seed) {
  if (s.reference) return draw_role(s, *s.reference, trial_seed, kReferenceRole).data.x;
  return train.generator.sample(s.train.n, 3);
}

double masked_rejected_fraction(const FilterOutcome& outcome, const std::vector<bool>& mask, bool masked) {
  std::size_t total = 0;
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != masked) continue;
    ++total;
    if (!outcome.accepted_mask[i]) ++rejected;
  }
  return total == 0 ? 0.0 : static_cast<double>(rejected) / static_cast<double>(total);
}

std::size_t count_masked_rejected(const std::vector<bool>& accepted, const std::vector<bool>& mask, bool masked) {
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == masked && !accepted[i]) ++rejected;
  }
  return rejected;
}

std::string serialize(const LearnerOutput& output) {
  std::ostringstream out(std::ios::binary);
  write_learner_output(out, output);
  return out.str();
}

void record_filter(json& m, const FilterOutcome& o) {
  put(m, "i_max", static_cast<double>(o.rounds.size()));
  put(m, "mu_final", o.final_value);
  put(m, "stop_threshold", o.parameters.stop_threshold);
  put(m, "clip_bound", o.parameters.clip_bound);
  put(m, "slack", o.parameters.slack);
  put(m, "clipped", static_cast<double>(o.clipped));
  put(m, "emptied", o.emptied ? 1.0 : 0.0);
  put(m, "forced_rounds",
      static_cast<double>(std::count_if(o.rounds.begin(), o.rounds.end(), [](const RoundLog& r) { return r.forced; })));
  put(m, "moment_fallback", o.selector.moments().used_fallback() ? 1.0 : 0.0);
}

TrialRecord run_filter_trial(const Scenario& s, std::uint64_t trial_seed, std::string* artifact) {
  TrialRecord r;
  const DrawnSample train = draw_role(s, s.train, trial_seed, kTrainRole);
  const DrawnSample test = draw_role(s, s.test, trial_seed, kTestRole);
  const FilterOutcome o = run_filter(train.data.x, test.data.x, s.filter);
  json& m = r.metrics;
  record_filter(m, o);
  const double t = static_cast<double>(o.parameters.basis_size);
  put(m, "iteration_bound", 10.0 * t * std::log2(o.parameters.clip_bound * t));
  put(m, "target_rejected_fraction", o.rejected_fraction());
  const std::size_t corrupted = static_cast<std::size_t>(std::count(test.corrupted.begin(), test.corrupted.end(), true));
  put(m, "corrupted", static_cast<double>(corrupted));
  put(m, "corrupted_rejected_fraction", corrupted ? masked_rejected_fraction(o, test.corrupted, true) : 1.0);
  put(m, "uncorrupted_rejected", static_cast<double>(count_masked_rejected(o.accepted_mask, test.corrupted, false)));
  put(m, "clean_rejection", rejection_fraction(o.selector, train.generator.sample(s.clean_n, 1)));
  if (s.smooth) {
    const DrawnSample smooth = draw_role(s, *s.smooth, trial_seed, kSmoothRole);
    put(m, "smooth_rejection", smoothness_check(o.selector, smooth.data.x));
  }
  for (std::size_t i = 0; i < o.rounds.size(); ++i) {
    r.series.push_back({static_cast<double>(i + 1), o.rounds[i].value, o.rounds[i].threshold,
                        static_cast<double>(o.rounds[i].removed)});
  }
  r.series.push_back({static_cast<double>(o.rounds.size() + 1), o.final_value, std::nan(""), std::nan("")});
  if (artifact) {
    std::ostringstream out(std::ios::binary);
    write_selector(out, o.selector);
    *artifact = out.str();
  }
  return r;
}

TrialRecord run_pq_trial(const Scenario& s, std::uint64_t trial_seed, std::string* artifact) {
  TrialRecord r;
  json& m = r.metrics;
  const DrawnSample train = draw_role(s, s.train, trial_seed, kTrainRole);
  DrawnSample test = draw_role(s, s.test, trial_seed, kTestRole);
  if (!test.labeler) {
    test.labeler = train.labeler;
    test.data = label(test.data.x, *train.labeler);
  }
  const LabeledDataset clean = draw_fresh(train, s.clean_n, 1);

  if (s.learner_kind == "adversarial") {
    const AdversarialPqOutput out = pq_learn_adversarial(train.data, test.data.x, *s.pair, s.epsilon, s.eta, s.delta);
    record_filter(m, out.filter);
    std::size_t wrong = 0;
    for (std::size_t i : out.accepted) wrong += out.h.predict(test.data.x.row(i)) != test.data.y[i] ? 1 : 0;
    const double n = static_cast<double>(test.data.size());
    put(m, "filtered_error", static_cast<double>(wrong) / n);
    put(m, "rejected_fraction", out.filter.rejected_fraction());
    put(m, "uncorrupted_rejected_fraction",
        static_cast<double>(count_masked_rejected(out.filter.accepted_mask, test.corrupted, false)) / n);
    put(m, "train_error", error_rate(out.h, train.data));
    if (artifact) *artifact = serialize({out.h, out.filter.selector, std::nullopt, m.dump()});
    return r;
  }

  PqOutput out;
  if (s.learner_kind == "halfspace") {
    out = pq_learn_halfspace(train.data, test.data.x, s.epsilon, s.delta, s.constants);
  } else if (s.learner_kind == "homogeneous") {
    out = pq_learn_homogeneous(train.data, s.epsilon, s.delta, derive_seed(trial_seed, 99));
  } else {
    out = pq_learn_sandwich(train.data, test.data.x, *s.pair, s.epsilon, s.eta, s.delta);
  }
  m["branch"] = std::string(to_string(out.diagnostics.branch));
  put(m, "low_frequency_branch", out.diagnostics.branch == PqBranch::LowFrequency ? 1.0 : 0.0);
  put(m, "min_label_frequency", out.diagnostics.min_label_frequency);
  put(m, "filter_rounds", static_cast<double>(out.diagnostics.filter_rounds));
  put(m, "selected_error", selected_error(out.h, out.g, test.data));
  put(m, "test_rejection", rejection_rate(out.g, test.data.x));
  put(m, "clean_rejection", rejection_rate(out.g, clean.x));
  put(m, "fresh_selected_error", selected_error(out.h, out.g, draw_fresh(test, s.eval_n, 1)));
  if (out.diagnostics.radius > 0.0) put(m, "radius", out.diagnostics.radius);
  if (artifact) *artifact = serialize({out.h, out.g, std::nullopt, m.dump()});
  return r;
}

TrialRecord run_tds_trial(const Scenario& s, std::uint64_t trial_seed, std::string* artifact) {
  TrialRecord r;
  json& m = r.metrics;
  const DrawnSample train = draw_role(s, s.train, trial_seed, kTrainRole);
  DrawnSample test = draw_role(s, s.test, trial_seed, kTestRole);
  if (!test.labeler) {
    test.labeler = train.labeler;
    test.data = label(test.data.x, *train.labeler);
  }
  const TdsOutput out = tds_learn(train.data, test.data.x, *s.pair, s.epsilon, s.theta, s.delta, s.constants);
  put(m, "accept", out.verdict == Verdict::Accept ? 1.0 : 0.0);
  put(m, "estimated_rejection", out.estimated_rejection_rate);
  put(m, "rejection_threshold", out.rejection_threshold);
  put(m, "filter_rounds", static_cast<double>(out.filter_rounds));
  if (out.h) {
    put(m, "test_error", error_rate(*out.h, test.data));
    put(m, "train_error", error_rate(*out.h, train.data));
  }
  if (artifact) *artifact = serialize({out.h.value_or(ConstantHypothesis{1}), out.g, out.verdict, m.dump()});
  return r;
}

TrialRecord run_testable_trial(const Scenario& s, std::uint64_t trial_seed, std::string* artifact) {
  TrialRecord r;
  json& m = r.metrics;
  const DrawnSample labeled = draw_role(s, s.train, trial_seed, kTrainRole);
  const Dataset reference = reference_sample(s, labeled, trial_seed);
  const TdsOutput out = testable_learn(labeled.data, reference, *s.pair, s.epsilon, s.theta, s.delta, s.constants);
  put(m, "accept", out.verdict == Verdict::Accept ? 1.0 : 0.0);
  put(m, "estimated_rejection", out.estimated_rejection_rate);
  put(m, "rejection_threshold", out.rejection_threshold);
  put(m, "filter_rounds", static_cast<double>(out.filter_rounds));
  put(m, "conditioned_size", static_cast<double>(out.conditioned_size));
  if (out.h) {
    SampleSpec eval = s.train;
    eval.n = s.eval_n;
    put(m, "test_error", error_rate(*out.h, draw_role(s, eval, trial_seed, kEvalRole).data));
    put(m, "clean_error", error_rate(*out.h, draw_fresh(labeled, s.eval_n, 1)));
  }
  if (artifact) *artifact = serialize({out.h.value_or(ConstantHypothesis{1}), out.g, out.verdict, m.dump()});
  return r;
}

TrialRecord run_nasty_trial(const Scenario& s, std::uint64_t trial_seed, std::string* artifact) {
  TrialRecord r;
  json& m = r.metrics;
  const DrawnSample data = draw_role(s, s.train, trial_seed, kTrainRole);
  const Dataset reference = reference_sample(s, data, trial_seed);
  const NastyOutput out = nasty_learn(data.data, reference, *s.pair, s.epsilon, s.delta, s.constants);
  std::vector<bool> accepted(data.data.size(), false);
  for (std::size_t i : out.accepted) accepted[i] = true;
  const double n = static_cast<double>(data.data.size());
  const std::size_t corrupted = static_cast<std::size_t>(std::count(data.corrupted.begin(), data.corrupted.end(), true));
  put(m, "filter_rounds", static_cast<double>(out.filter_rounds));
  put(m, "accepted_fraction", static_cast<double>(out.accepted.size()) / n);
  put(m, "corrupted", static_cast<double>(corrupted));
  if (corrupted) {
    put(m, "corrupted_rejected_fraction",
        static_cast<double>(count_masked_rejected(accepted, data.corrupted, true)) / static_cast<double>(corrupted));
  }
  put(m, "error", error_rate(out.h, draw_fresh(data, s.eval_n, 1)));
  put(m, "train_error", error_rate(out.h, data.data));
  if (artifact) *artifact = serialize({out.h, AcceptAll{}, std::nullopt, m.dump()});
  return r;
}

TrialRecord run_trial(const Scenario& s, std::size_t index, std::string* artifact) {
  const std::uint64_t trial_seed = derive_seed(s.seed, index);
  TrialRecord r;
  try {
    switch (s.command) {
      case Command::Filter:
        r = run_filter_trial(s, trial_seed, artifact);
        break;
      case Command::Pq:
        r = run_pq_trial(s, trial_seed, artifact);
        break;
      case Command::Tds:
        r = run_tds_trial(s, trial_seed, artifact);
        break;
      case Command::Testable:
        r = run_testable_trial(s, trial_seed, artifact);
        break;
      case Command::Nasty:
        r = run_nasty_trial(s, trial_seed, artifact);
        break;
    }
  } catch (const std::exception& e) {
    r = TrialRecord{};
    r.ok = false;
    r.error = e.what();
    spdlog::warn("trial {} failed: {}", index, e.what());
  }
  r.index = index;
  return r;
}

std::string series_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream out;
  out.precision(17);
  out << "trial,round,mu,tau,removed\n";
  for (const auto& r : records) {
    for (const auto& row : r.series) {
      out << r.index << ',' << static_cast<std::size_t>(row[0]) << ',' << row[1] << ',';
      if (std::isfinite(row[2])) out << row[2];
      out << ',';
      if (std::isfinite(row[3])) out << static_cast<std::size_t>(row[3]);
      out << '\n';
    }
  }
  return out.str();
}

CommandResult run_prepared(const Scenario& s, const RunOptions& options, std::vector<std::string>* artifacts) {
  std::vector<TrialRecord> records(s.trials);
  if (artifacts) artifacts->assign(s.trials, {});
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, s.trials));
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < s.trials; i = next++) {
      const auto start = std::chrono::steady_clock::now();
      records[i] = run_trial(s, i, artifacts ? &(*artifacts)[i] : nullptr);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      spdlog::info("{} trial {} finished in {:.3f} s", to_string(s.command), i, elapsed.count());
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  CommandResult result;
  json trials = json::array();
  for (const auto& r : records) {
    json t = {{"index", r.index}, {"status", r.ok ? "ok" : "failed"}};
    if (r.ok) {
      t["metrics"] = r.metrics;
    } else {
      t["error"] = r.error;
      ++result.failures;
    }
    trials.push_back(std::move(t));
  }
  result.report = {{"command", to_string(s.command)},
                   {"config", s.config},
                   {"trials", std::move(trials)},
                   {"aggregates", aggregate(records)},
                   {"failures", result.failures}};
  if (s.command == Command::Filter) result.series_csv = series_csv(records);
  result.exit_code = result.failures > 0 ? 1 : 0;
  return result;
}

}  // namespace

CommandResult run_command(Command command, const json& config, const RunOptions& options) {
  return run_prepared(prepare(command, config, options), options, nullptr);
}

int execute_command(Command command, const std::filesystem::path& config_path, const RunOptions& options,
                    std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  json config;
  {
    std::ifstream in(config_path);
    if (!in) {
      err << "error: cannot open config " << config_path.string() << '\n';
      return 2;
    }
    try {
      config = json::parse(in);
    } catch (const json::parse_error& e) {
      err << "error: cannot parse " << config_path.string() << ": " << e.what() << '\n';
      return 2;
    }
  }
  Scenario scenario;
  try {
    scenario = prepare(command, config, options);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  std::vector<std::string> artifacts;
  const CommandResult result = run_prepared(scenario, options, scenario.save_outputs ? &artifacts : nullptr);

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  const auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(options.out_dir / name, std::ios::binary);
    out << text;
    if (!out) throw FormatError("cannot write " + (options.out_dir / name).string());
  };
  try {
    write("report.json", result.report.dump(2) + "\n");
    if (command == Command::Filter) write("series.csv", result.series_csv);
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
      if (!artifacts[i].empty()) write("trial_" + std::to_string(i) + ".sgc", artifacts[i]);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  spdlog::info("{}: {} trials, {} failed, {:.3f} s wall", to_string(command), scenario.trials, result.failures,
               elapsed.count());
  if (result.failures > 0) {
    err << result.failures << " of " << scenario.trials << " trials failed\n";
  }
  return result.exit_code;
}

}  // namespace shiftguard::experiments
