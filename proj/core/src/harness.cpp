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


#include "madlab/harness.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "madlab/error.hpp"
#include "madlab/rng.hpp"
#include "madlab/trajectory_io.hpp"

namespace madlab
{
namespace
{

constexpr std::uint64_t kEvalTag = hash_string("eval");
constexpr std::uint64_t kWarmupTag = hash_string("warmup");

std::string
render_trajectories(std::span<const DebateTrajectory> trajectories)
{
  std::string out;
  for (const auto &t : trajectories) {
    out += format_trajectory_line(t);
    out += '\n';
  }
  return out;
}

std::string
render_profiles(const Evaluation &eval)
{
  std::string out = profile_csv_header() + '\n';
  for (std::size_t n = 0; n < eval.trajectories.size(); ++n) {
    out += format_profile_csv_row(eval.trajectories[n].question_id(), eval.profiles[n]);
    out += '\n';
  }
  return out;
}

std::string
render_rewards(std::span<const DebateTrajectory> trajectories, const CoefficientSet &coeffs)
{
  std::string out = "question_id,r_intra,r_inter,r_sys,r_task";
  for (std::size_t i = 0; i < coeffs.size(); ++i) out += fmt::format(",r_total_{}", i);
  out += '\n';
  for (const auto &t : trajectories) {
    const auto r = total_reward(t, coeffs);
    out += fmt::format("{},{:.6f},{:.6f},{:.6f},{}", t.question_id(), r.r_intra, r.r_inter, r.r_sys, r.r_task);
    for (const double v : r.total) out += fmt::format(",{:.6f}", v);
    out += '\n';
  }
  return out;
}

std::string
render_coefficients(const TrainedEnsemble &ensemble)
{
  std::string out = "agent,U_intra_bar,U_inter_bar,L_bar,U_sys_bar,alpha,beta,gamma,lambda,eta\n";
  for (std::size_t i = 0; i < ensemble.coeffs.size(); ++i) {
    const auto &p = ensemble.warmup[i];
    const auto &c = ensemble.coeffs[i];
    out += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", i, p.u_intra_bar,
                       p.u_inter_bar, p.loo_bar, p.u_sys_bar, c.alpha, c.beta, c.gamma, c.lambda_task, c.eta_anchor);
  }
  return out;
}

template <class F>
std::string
render(F &&write)
{
  std::ostringstream out;
  write(out);
  return out.str();
}

std::vector<OutcomeRecord>
outcome_records(std::span<const DebateTrajectory> trajectories, const MetricConfig &metric, std::size_t &excluded)
{
  std::vector<OutcomeRecord> records;
  excluded = 0;
  for (const auto &t : trajectories) {
    if (!t.ground_truth()) {
      ++excluded;
      continue;
    }
    records.push_back({t.question_id(), reward_task(t) == 1, full_profile(t, metric)});
  }
  return records;
}

std::string
arm_name(std::optional<RewardComponent> zeroed)
{
  if (!zeroed) return "udpo";
  switch (*zeroed) {
    case RewardComponent::kIntra: return "udpo_wo_alpha";
    case RewardComponent::kInter: return "udpo_wo_beta";
    case RewardComponent::kSys: return "udpo_wo_gamma";
  }
  return "udpo";
}

}  // namespace

void
write_artifacts(const Artifacts &artifacts, const std::filesystem::path &dir)
{
  for (const auto &[name, contents] : artifacts.files) {
    const auto path = dir / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << contents;
    if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
  }
}

std::string
summary_csv_header()
{
  return "arm,num_agents,rounds,compromised,n_questions,accuracy,mean_U_intra,mean_U_inter,mean_U_sys";
}

std::string
format_summary_row(const EvalSummary &s)
{
  return fmt::format("{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f}", s.arm, s.num_agents, s.rounds, s.compromised,
                     s.n_questions, s.accuracy, s.mean_u_intra, s.mean_u_inter, s.mean_u_sys);
}

std::string
render_summary_csv(std::span<const EvalSummary> rows)
{
  std::string out = summary_csv_header() + '\n';
  for (const auto &r : rows) out += format_summary_row(r) + '\n';
  return out;
}

QuestionSets
make_question_sets(const ExperimentConfig &config)
{
  const auto &e = config.environment;
  return {generate_questions(e.train_questions, e.difficulty, e.answer_space_size, e.seed, "t"),
          generate_questions(e.eval_questions, e.difficulty, e.answer_space_size, combine_key(e.seed, kEvalTag), "e")};
}

DebateEnvironment
make_environment(const ExperimentConfig &config, std::size_t compromised)
{
  const auto &e = config.environment;
  return DebateEnvironment(e.sim_params(), make_agents(e.num_agents, e.skill_max, e.skill_min, compromised), e.rounds);
}

Evaluation
evaluate_policies(const DebateEnvironment &env,
                  std::span<const SyntheticQuestion> questions,
                  std::span<const PolicyTable> policies,
                  const MetricConfig &metric,
                  std::string arm)
{
  if (questions.empty()) throw Error("no questions to evaluate");
  Evaluation eval;
  auto &s = eval.summary;
  s.arm = std::move(arm);
  s.num_agents = env.num_agents();
  s.rounds = env.rounds();
  for (const auto &a : env.agents()) s.compromised += a.honest() ? 0 : 1;
  s.n_questions = questions.size();

  for (const auto &q : questions) {
    auto t = env.rollout(q, policies, kEvalTag);
    auto p = full_profile(t, metric);
    s.accuracy += reward_task(t);
    s.mean_u_intra += p.u_intra;
    s.mean_u_inter += p.u_inter;
    s.mean_u_sys += p.u_sys;
    eval.trajectories.push_back(std::move(t));
    eval.profiles.push_back(std::move(p));
  }
  const auto n = static_cast<double>(questions.size());
  s.accuracy /= n;
  s.mean_u_intra /= n;
  s.mean_u_inter /= n;
  s.mean_u_sys /= n;
  return eval;
}

TrainedEnsemble
train_ensemble(const ExperimentConfig &config, const QuestionSets &questions, std::optional<RewardComponent> zeroed)
{
  const auto env = make_environment(config, 0);
  const auto split = split_warmup(questions.train, config.calibration.warmup_fraction);
  const std::vector<PolicyTable> initial(env.num_agents(), PolicyTable(env.num_slots()));

  std::vector<DebateTrajectory> warmup;
  warmup.reserve(split.warmup.size());
  for (const auto &q : split.warmup) warmup.push_back(env.rollout(q, initial, kWarmupTag));

  TrainedEnsemble out;
  out.warmup = warmup_profile(warmup, env.num_agents(), config.metric);
  out.coeffs = calibrate_coefficients(out.warmup, config.calibration);
  if (zeroed) out.coeffs = zero_component(out.coeffs, *zeroed);

  TrainOptions options;
  options.clip = config.udpo;
  options.metric = config.metric;
  options.seed = config.environment.seed;
  if (config.replay.enabled) {
    options.replay = ReplaySettings{config.replay.fraction,
                                    config.replay.refresh_period,
                                    {config.calibration.alpha_base, config.calibration.beta_base,
                                     config.calibration.gamma_base}};
    out.buffer.emplace(config.replay.capacity, config.replay.priority_exponent);
  }
  out.state = train(env, split.train, TrainState::initial(env, out.coeffs), options,
                    out.buffer ? &*out.buffer : nullptr);
  return out;
}

BaselineResult
run_baseline(const ExperimentConfig &config)
{
  config.validate();
  const auto questions = make_question_sets(config);
  const auto env = make_environment(config, config.environment.compromised_count);
  const std::vector<PolicyTable> initial(env.num_agents(), PolicyTable(env.num_slots()));

  BaselineResult result;
  result.eval = evaluate_policies(env, questions.eval, initial, config.metric, "baseline");
  auto &files = result.artifacts.files;
  files["config.ini"] = config.to_ini();
  files["trajectories.jsonl"] = render_trajectories(result.eval.trajectories);
  files["profiles.csv"] = render_profiles(result.eval);
  files["rewards.csv"] =
      render_rewards(result.eval.trajectories, base_coefficients(env.num_agents(), config.calibration));
  files["summary.csv"] = render_summary_csv(std::span(&result.eval.summary, 1));
  return result;
}

UdpoResult
run_udpo(const ExperimentConfig &config, std::optional<RewardComponent> zeroed)
{
  config.validate();
  const auto questions = make_question_sets(config);
  const auto env = make_environment(config, config.environment.compromised_count);
  const std::vector<PolicyTable> initial(env.num_agents(), PolicyTable(env.num_slots()));

  UdpoResult result;
  result.ensemble = train_ensemble(config, questions, zeroed);
  result.baseline = evaluate_policies(env, questions.eval, initial, config.metric, "baseline");
  result.trained = evaluate_policies(env, questions.eval, result.ensemble.state.current, config.metric, arm_name(zeroed));

  // Gains per stratum of the untrained ensemble's U_sys.
  std::vector<OutcomeRecord> base_records;
  for (std::size_t n = 0; n < questions.eval.size(); ++n) {
    base_records.push_back({questions.eval[n].id, reward_task(result.baseline.trajectories[n]) == 1,
                            result.baseline.profiles[n]});
  }
  const auto strata = stratify_by_uncertainty(base_records, UncertaintyMetric::kSys, config.analysis.strata);
  for (const auto &s : strata) {
    StratumGain g{s.lo, s.hi, s.count, s.accuracy, std::nullopt};
    if (s.count > 0) {
      std::size_t correct = 0;
      for (std::size_t n = 0; n < base_records.size(); ++n) {
        const double u = base_records[n].profile.u_sys;
        const bool last = s.hi >= 1.0;
        if (u >= s.lo && (u < s.hi || last)) correct += static_cast<std::size_t>(reward_task(result.trained.trajectories[n]));
      }
      g.trained_accuracy = static_cast<double>(correct) / static_cast<double>(s.count);
    }
    result.strata_gain.push_back(g);
  }

  auto &files = result.artifacts.files;
  const auto hash = config.hash();
  const auto space = make_answer_space(config.environment.answer_space_size);
  files["config.ini"] = config.to_ini();
  for (std::size_t i = 0; i < env.num_agents(); ++i) {
    files[fmt::format("policies/agent_{}.policy", i)] =
        render([&](std::ostream &out) { write_policy(out, result.ensemble.state.current[i], space, hash); });
  }
  std::string metrics = training_metrics_header() + '\n';
  for (const auto &m : result.ensemble.state.history) metrics += format_training_metrics_row(m) + '\n';
  files["training_metrics.csv"] = std::move(metrics);
  files["coefficients.csv"] = render_coefficients(result.ensemble);
  files["trajectories.jsonl"] = render_trajectories(result.trained.trajectories);
  files["profiles.csv"] = render_profiles(result.trained);
  files["rewards.csv"] = render_rewards(result.trained.trajectories, result.ensemble.coeffs);
  const EvalSummary rows[] = {result.baseline.summary, result.trained.summary};
  files["summary.csv"] = render_summary_csv(rows);
  if (result.ensemble.buffer) {
    files["replay_buffer.jsonl"] = render([&](std::ostream &out) { write_replay_buffer(out, *result.ensemble.buffer); });
  }
  std::string gain = "bin_lo,bin_hi,n,baseline_accuracy,udpo_accuracy,gain\n";
  for (const auto &g : result.strata_gain) {
    const bool both = g.baseline_accuracy && g.trained_accuracy;
    gain += fmt::format("{},{},{},{},{},{}\n", format_real(g.lo), format_real(g.hi), g.count,
                        g.baseline_accuracy ? format_real(*g.baseline_accuracy) : "NA",
                        g.trained_accuracy ? format_real(*g.trained_accuracy) : "NA",
                        both ? format_real(*g.trained_accuracy - *g.baseline_accuracy) : "NA");
  }
  files["strata_gain.csv"] = std::move(gain);
  return result;
}

AttackResult
run_attack(const ExperimentConfig &config, std::span<const std::size_t> compromised)
{
  config.validate();
  if (compromised.empty()) throw ConfigError("attack: no compromised counts given");
  AttackResult result;
  const auto n = config.environment.num_agents;
  for (const auto m : compromised) {
    if (m > n) throw ConfigError(fmt::format("attack: {} compromised agents exceed the {} agents", m, n));
    if (m == n) result.artifacts.warnings.push_back(fmt::format("attack: m = {} leaves no honest agent", m));
    else if (2 * m >= n) result.artifacts.warnings.push_back(fmt::format("attack: m = {} of {} leaves no honest majority", m, n));
  }

  const auto questions = make_question_sets(config);
  const auto ensemble = train_ensemble(config, questions);
  const auto clean = make_environment(config, 0);
  const std::vector<PolicyTable> initial(n, PolicyTable(clean.num_slots()));

  result.rows.push_back(evaluate_policies(clean, questions.eval, initial, config.metric, "untrained").summary);
  result.rows.push_back(evaluate_policies(clean, questions.eval, ensemble.state.current, config.metric, "udpo").summary);
  for (const auto m : compromised) {
    if (m == 0) continue;
    const auto env = make_environment(config, m);
    result.rows.push_back(evaluate_policies(env, questions.eval, initial, config.metric, "untrained").summary);
    result.rows.push_back(evaluate_policies(env, questions.eval, ensemble.state.current, config.metric, "udpo").summary);
  }
  result.artifacts.files["config.ini"] = config.to_ini();
  result.artifacts.files["summary.csv"] = render_summary_csv(result.rows);
  return result;
}

AnalysisResult
analyze_trajectories(std::span<const DebateTrajectory> trajectories, const ExperimentConfig &config)
{
  AnalysisResult result;
  auto &warnings = result.artifacts.warnings;
  auto &files = result.artifacts.files;

  std::string profiles = profile_csv_header() + '\n';
  for (const auto &t : trajectories) profiles += format_profile_csv_row(t.question_id(), full_profile(t, config.metric)) + '\n';
  files["profiles.csv"] = std::move(profiles);

  result.records = outcome_records(trajectories, config.metric, result.excluded);
  if (result.excluded > 0) {
    warnings.push_back(fmt::format("{} trajectories without ground truth excluded from accuracy reports", result.excluded));
  }

  try {
    result.separation = separation_report(result.records);
    files["separation.csv"] = render([&](std::ostream &out) { write_separation_csv(out, *result.separation); });
  } catch (const DegenerateSample &e) {
    warnings.push_back(fmt::format("separation skipped: {}", e.what()));
  }
  try {
    result.correlation = correlation_matrix(result.records);
    files["correlation.csv"] = render([&](std::ostream &out) { write_correlation_csv(out, *result.correlation); });
    files["correlation_p.csv"] = render([&](std::ostream &out) { write_correlation_p_csv(out, *result.correlation); });
  } catch (const DegenerateSample &e) {
    warnings.push_back(fmt::format("correlation skipped: {}", e.what()));
  }
  if (result.records.empty()) {
    warnings.push_back("selective prediction and strata skipped: no supervised trajectories");
    return result;
  }
  result.selective = selective_prediction_curve(result.records, config.analysis.k_grid, config.analysis.ranking_metric);
  files["selective.csv"] = render([&](std::ostream &out) { write_selective_csv(out, result.selective); });
  result.strata = stratify_by_uncertainty(result.records, config.analysis.ranking_metric, config.analysis.strata);
  files["strata.csv"] = render([&](std::ostream &out) { write_strata_csv(out, result.strata); });
  return result;
}

AnalysisResult
run_analysis(std::span<const std::filesystem::path> inputs, const ExperimentConfig &config)
{
  config.validate();
  if (inputs.empty()) throw Error("analyze: no input files");
  std::vector<DebateTrajectory> trajectories;
  for (const auto &path : inputs) {
    for (auto &line : read_trajectory_file(path)) trajectories.push_back(std::move(line.trajectory));
  }
  return analyze_trajectories(trajectories, config);
}

SweepResult
run_sweep(const ExperimentConfig &config)
{
  config.validate();
  SweepResult result;
  const auto &sweep = config.sweep;

  for (const auto value : sweep.values) {
    auto cell = config;
    switch (sweep.axis) {
      case SweepAxis::kAgents: cell.environment.num_agents = value; break;
      case SweepAxis::kRounds: cell.environment.rounds = value; break;
      case SweepAxis::kCompromised: cell.environment.compromised_count = value; break;
    }
    cell.validate();
    if (sweep.pipeline == Pipeline::kBaseline) {
      result.rows.push_back(run_baseline(cell).eval.summary);
    } else if (sweep.axis == SweepAxis::kCompromised) {
      const std::size_t m[] = {value};
      auto attack = run_attack(cell, m);
      result.rows.push_back(attack.rows.back());
      for (auto &w : attack.artifacts.warnings) result.artifacts.warnings.push_back(std::move(w));
    } else {
      result.rows.push_back(run_udpo(cell).trained.summary);
    }
  }
  result.artifacts.files["config.ini"] = config.to_ini();
  result.artifacts.files["summary.csv"] = render_summary_csv(result.rows);
  return result;
}

}  // namespace madlab
