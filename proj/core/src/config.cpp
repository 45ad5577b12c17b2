/*
 * Copyright 2026 The madlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "madlab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "madlab/error.hpp"
#include "madlab/rng.hpp"

namespace madlab
{
namespace
{

using Setter = std::function<void(const std::string &)>;
using Block = std::map<std::string, Setter>;

[[noreturn]] void
bad_value(const std::string &path, const std::string &value, std::string_view expected)
{
  throw ConfigError(fmt::format("{}: expected {}, got '{}'", path, expected, value));
}

template <class T>
T
parse_number(const std::string &path, const std::string &text, std::string_view expected)
{
  T value{};
  const auto *first = text.data();
  const auto *last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) bad_value(path, text, expected);
  return value;
}

double
parse_real(const std::string &path, const std::string &text)
{
  const auto v = parse_number<double>(path, text, "a real number");
  if (!std::isfinite(v)) bad_value(path, text, "a finite real number");
  return v;
}

template <class T>
std::vector<T>
parse_list(const std::string &path, const std::string &text, std::string_view expected)
{
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) bad_value(path, text, expected);
    out.push_back(parse_number<T>(path, item.substr(b, e - b + 1), expected));
  }
  if (out.empty()) bad_value(path, text, expected);
  return out;
}

template <class T>
std::string
join(const std::vector<T> &v)
{
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != 0) out += ',';
    out += fmt::format("{}", v[i]);
  }
  return out;
}

std::map<std::string, Block>
setters(ExperimentConfig &c)
{
  auto size = [](std::size_t &field, std::string path) -> Setter {
    return [&field, path](const std::string &v) { field = parse_number<std::size_t>(path, v, "a non-negative integer"); };
  };
  auto real = [](double &field, std::string path) -> Setter {
    return [&field, path](const std::string &v) { field = parse_real(path, v); };
  };

  auto &env = c.environment;
  auto &u = c.udpo;
  auto &cal = c.calibration;
  auto &rep = c.replay;
  auto &an = c.analysis;
  auto &sw = c.sweep;
  return {
      {"environment",
       {{"num_agents", size(env.num_agents, "environment.num_agents")},
        {"rounds", size(env.rounds, "environment.rounds")},
        {"answer_space_size", size(env.answer_space_size, "environment.answer_space_size")},
        {"difficulty_bins", size(env.difficulty_bins, "environment.difficulty_bins")},
        {"compromised_count", size(env.compromised_count, "environment.compromised_count")},
        {"adversarial_target_policy",
         [&env](const std::string &v) {
           const auto p = parse_target_policy(v);
           if (!p) bad_value("environment.adversarial_target_policy", v, "fixed_distractor or random_wrong");
           env.adversarial_target_policy = *p;
         }},
        {"seed",
         [&env](const std::string &v) {
           env.seed = parse_number<std::uint64_t>("environment.seed", v, "an unsigned 64-bit integer");
         }},
        {"train_questions", size(env.train_questions, "environment.train_questions")},
        {"eval_questions", size(env.eval_questions, "environment.eval_questions")},
        {"difficulty",
         [&env](const std::string &v) {
           try {
             env.difficulty = DifficultySpec::parse(v);
           } catch (const Error &e) {
             throw ConfigError(fmt::format("environment.difficulty: {}", e.what()));
           }
         }},
        {"skill_max", real(env.skill_max, "environment.skill_max")},
        {"skill_min", real(env.skill_min, "environment.skill_min")},
        {"prior_strength", real(env.prior_strength, "environment.prior_strength")},
        {"prior_noise", real(env.prior_noise, "environment.prior_noise")},
        {"stickiness", real(env.stickiness, "environment.stickiness")},
        {"conformity", real(env.conformity, "environment.conformity")}}},
      {"metric", {{"lambda", real(c.metric.lambda_mix, "metric.lambda")}}},
      {"udpo",
       {{"epsilon", real(u.epsilon, "udpo.epsilon")},
        {"learn_rate", real(u.learn_rate, "udpo.learn_rate")},
        {"batch_size", size(u.batch_size, "udpo.batch_size")},
        {"iterations", size(u.iterations, "udpo.iterations")},
        {"ref_refresh_period", size(u.ref_refresh_period, "udpo.ref_refresh_period")},
        {"alpha_base", real(cal.alpha_base, "udpo.alpha_base")},
        {"beta_base", real(cal.beta_base, "udpo.beta_base")},
        {"gamma_base", real(cal.gamma_base, "udpo.gamma_base")},
        {"lambda_base", real(cal.lambda_base, "udpo.lambda_base")},
        {"eta_base", real(cal.eta_base, "udpo.eta_base")},
        {"kappa", real(cal.kappa, "udpo.kappa")},
        {"warmup_fraction", real(cal.warmup_fraction, "udpo.warmup_fraction")}}},
      {"replay",
       {{"enabled",
         [&rep](const std::string &v) {
           if (v == "true" || v == "1") {
             rep.enabled = true;
           } else if (v == "false" || v == "0") {
             rep.enabled = false;
           } else {
             bad_value("replay.enabled", v, "true or false");
           }
         }},
        {"capacity", size(rep.capacity, "replay.capacity")},
        {"priority_exponent", real(rep.priority_exponent, "replay.priority_exponent")},
        {"refresh_period", size(rep.refresh_period, "replay.refresh_period")},
        {"fraction", real(rep.fraction, "replay.fraction")}}},
      {"analysis",
       {{"k_grid", [&an](const std::string &v) { an.k_grid = parse_list<double>("analysis.k_grid", v, "a list of percents"); }},
        {"strata", [&an](const std::string &v) { an.strata = parse_list<double>("analysis.strata", v, "a list of reals"); }},
        {"ranking_metric",
         [&an](const std::string &v) {
           const auto m = parse_uncertainty_metric(v);
           if (!m) bad_value("analysis.ranking_metric", v, "U_intra, U_inter or U_sys");
           an.ranking_metric = *m;
         }}}},
      {"sweep",
       {{"axis",
         [&sw](const std::string &v) {
           const auto a = parse_sweep_axis(v);
           if (!a) bad_value("sweep.axis", v, "agents, rounds or compromised");
           sw.axis = *a;
         }},
        {"values",
         [&sw](const std::string &v) {
           sw.values = parse_list<std::size_t>("sweep.values", v, "a list of non-negative integers");
         }},
        {"pipeline",
         [&sw](const std::string &v) {
           if (v == "baseline") {
             sw.pipeline = Pipeline::kBaseline;
           } else if (v == "udpo") {
             sw.pipeline = Pipeline::kUdpo;
           } else {
             bad_value("sweep.pipeline", v, "baseline or udpo");
           }
         }}}},
      {"output", {{"dir", [&c](const std::string &v) { c.output_dir = v; }}}},
  };
}

void
require(bool ok, std::string_view path, std::string_view what)
{
  if (!ok) throw ConfigError(fmt::format("{}: {}", path, what));
}

}  // namespace

SimParams
EnvironmentConfig::sim_params() const
{
  SimParams p;
  p.answer_space_size = answer_space_size;
  p.difficulty_bins = difficulty_bins;
  p.prior_strength = prior_strength;
  p.prior_noise = prior_noise;
  p.stickiness = stickiness;
  p.conformity = conformity;
  p.target_policy = adversarial_target_policy;
  p.seed = seed;
  return p;
}

std::optional<SweepAxis>
parse_sweep_axis(std::string_view name)
{
  if (name == "agents") return SweepAxis::kAgents;
  if (name == "rounds") return SweepAxis::kRounds;
  if (name == "compromised") return SweepAxis::kCompromised;
  return std::nullopt;
}

std::string_view
to_string(SweepAxis axis)
{
  switch (axis) {
    case SweepAxis::kAgents: return "agents";
    case SweepAxis::kRounds: return "rounds";
    case SweepAxis::kCompromised: return "compromised";
  }
  return "?";
}

void
ExperimentConfig::validate() const
{
  const auto &e = environment;
  require(e.num_agents >= 2, "environment.num_agents", "must be at least 2");
  require(e.rounds >= 1, "environment.rounds", "must be at least 1");
  require(e.answer_space_size >= 2 && e.answer_space_size <= 26, "environment.answer_space_size", "must be in [2, 26]");
  require(e.difficulty_bins >= 1 && e.difficulty_bins < 255, "environment.difficulty_bins", "must be in [1, 254]");
  require(e.compromised_count <= e.num_agents, "environment.compromised_count", "exceeds num_agents");
  require(e.train_questions >= 2, "environment.train_questions", "must be at least 2");
  require(e.eval_questions >= 1, "environment.eval_questions", "must be at least 1");
  require(e.skill_max >= 0.0 && e.skill_max <= 1.0, "environment.skill_max", "must be in [0, 1]");
  require(e.skill_min >= 0.0 && e.skill_min <= 1.0, "environment.skill_min", "must be in [0, 1]");
  require(e.prior_strength >= 0.0, "environment.prior_strength", "must be >= 0");
  require(e.prior_noise >= 0.0, "environment.prior_noise", "must be >= 0");

  metric.validate();
  udpo.validate();
  calibration.validate();

  require(replay.capacity > 0, "replay.capacity", "must be positive");
  require(replay.priority_exponent >= 0.0, "replay.priority_exponent", "must be >= 0");
  require(replay.fraction >= 0.0 && replay.fraction < 1.0, "replay.fraction", "must be in [0, 1)");

  for (const double k : analysis.k_grid) require(k > 0.0 && k <= 100.0, "analysis.k_grid", "entries must be in (0, 100]");
  double prev = 0.0;
  for (const double b : analysis.strata) {
    require(b > prev && b < 1.0, "analysis.strata", "must increase strictly inside (0, 1)");
    prev = b;
  }
  require(!sweep.values.empty(), "sweep.values", "must not be empty");
}

std::string
ExperimentConfig::to_ini() const
{
  const auto &e = environment;
  std::string out;
  out += "[environment]\n";
  out += fmt::format("num_agents = {}\n", e.num_agents);
  out += fmt::format("rounds = {}\n", e.rounds);
  out += fmt::format("answer_space_size = {}\n", e.answer_space_size);
  out += fmt::format("difficulty_bins = {}\n", e.difficulty_bins);
  out += fmt::format("compromised_count = {}\n", e.compromised_count);
  out += fmt::format("adversarial_target_policy = {}\n", to_string(e.adversarial_target_policy));
  out += fmt::format("seed = {}\n", e.seed);
  out += fmt::format("train_questions = {}\n", e.train_questions);
  out += fmt::format("eval_questions = {}\n", e.eval_questions);
  out += fmt::format("difficulty = {}\n", e.difficulty.to_string());
  out += fmt::format("skill_max = {}\n", e.skill_max);
  out += fmt::format("skill_min = {}\n", e.skill_min);
  out += fmt::format("prior_strength = {}\n", e.prior_strength);
  out += fmt::format("prior_noise = {}\n", e.prior_noise);
  out += fmt::format("stickiness = {}\n", e.stickiness);
  out += fmt::format("conformity = {}\n", e.conformity);
  out += "\n[metric]\n";
  out += fmt::format("lambda = {}\n", metric.lambda_mix);
  out += "\n[udpo]\n";
  out += fmt::format("epsilon = {}\n", udpo.epsilon);
  out += fmt::format("learn_rate = {}\n", udpo.learn_rate);
  out += fmt::format("batch_size = {}\n", udpo.batch_size);
  out += fmt::format("iterations = {}\n", udpo.iterations);
  out += fmt::format("ref_refresh_period = {}\n", udpo.ref_refresh_period);
  out += fmt::format("alpha_base = {}\n", calibration.alpha_base);
  out += fmt::format("beta_base = {}\n", calibration.beta_base);
  out += fmt::format("gamma_base = {}\n", calibration.gamma_base);
  out += fmt::format("lambda_base = {}\n", calibration.lambda_base);
  out += fmt::format("eta_base = {}\n", calibration.eta_base);
  out += fmt::format("kappa = {}\n", calibration.kappa);
  out += fmt::format("warmup_fraction = {}\n", calibration.warmup_fraction);
  out += "\n[replay]\n";
  out += fmt::format("enabled = {}\n", replay.enabled);
  out += fmt::format("capacity = {}\n", replay.capacity);
  out += fmt::format("priority_exponent = {}\n", replay.priority_exponent);
  out += fmt::format("refresh_period = {}\n", replay.refresh_period);
  out += fmt::format("fraction = {}\n", replay.fraction);
  out += "\n[analysis]\n";
  out += fmt::format("k_grid = {}\n", join(analysis.k_grid));
  out += fmt::format("strata = {}\n", join(analysis.strata));
  out += fmt::format("ranking_metric = {}\n", to_string(analysis.ranking_metric));
  out += "\n[sweep]\n";
  out += fmt::format("axis = {}\n", to_string(sweep.axis));
  out += fmt::format("values = {}\n", join(sweep.values));
  out += fmt::format("pipeline = {}\n", sweep.pipeline == Pipeline::kUdpo ? "udpo" : "baseline");
  out += "\n[output]\n";
  out += fmt::format("dir = {}\n", output_dir.generic_string());
  return out;
}

std::uint64_t
ExperimentConfig::hash() const
{
  return hash_string(to_ini());
}

ExperimentConfig
parse_config(std::istream &in)
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw ConfigError(fmt::format("line {}: {}", e.line(), e.message()));
  }

  ExperimentConfig config;
  auto blocks = setters(config);
  for (const auto &[block_name, block] : tree) {
    const auto b = blocks.find(block_name);
    if (b == blocks.end()) {
      if (block.empty()) throw ConfigError(fmt::format("{}: key outside any block", block_name));
      throw ConfigError(fmt::format("{}: unknown block", block_name));
    }
    for (const auto &[key, value] : block) {
      const auto s = b->second.find(key);
      if (s == b->second.end()) throw ConfigError(fmt::format("{}.{}: unknown key", block_name, key));
      s->second(value.data());
    }
  }
  config.validate();
  return config;
}

ExperimentConfig
load_config(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  return parse_config(in);
}

}  // namespace madlab
