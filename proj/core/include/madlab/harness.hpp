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


#ifndef MADLAB_HARNESS_HPP
#define MADLAB_HARNESS_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "madlab/calibration.hpp"
#include "madlab/config.hpp"
#include "madlab/debate.hpp"
#include "madlab/metrics.hpp"
#include "madlab/replay.hpp"
#include "madlab/reward.hpp"
#include "madlab/sim.hpp"
#include "madlab/stats.hpp"
#include "madlab/udpo.hpp"

namespace madlab
{

/// Rendered output files keyed by relative path, plus non-fatal warnings.
struct Artifacts {
  std::map<std::string, std::string> files;
  std::vector<std::string> warnings;
};

/// Writes every file under `dir`, creating directories as needed.
void write_artifacts(const Artifacts &artifacts, const std::filesystem::path &dir);

struct EvalSummary {
  std::string arm;
  std::size_t num_agents{};
  std::size_t rounds{};
  std::size_t compromised{};
  std::size_t n_questions{};
  double accuracy{};
  double mean_u_intra{};
  double mean_u_inter{};
  double mean_u_sys{};
};

/// `arm,num_agents,rounds,compromised,n_questions,accuracy,mean_U_intra,mean_U_inter,mean_U_sys`
std::string summary_csv_header();
std::string format_summary_row(const EvalSummary &summary);
std::string render_summary_csv(std::span<const EvalSummary> rows);

struct Evaluation {
  EvalSummary summary;
  std::vector<DebateTrajectory> trajectories;
  std::vector<UncertaintyProfile> profiles;
};

struct QuestionSets {
  std::vector<SyntheticQuestion> train;
  std::vector<SyntheticQuestion> eval;
};

QuestionSets make_question_sets(const ExperimentConfig &config);
DebateEnvironment make_environment(const ExperimentConfig &config, std::size_t compromised);

/// Rolls out every question once under `policies` and summarizes the outcome.
Evaluation evaluate_policies(const DebateEnvironment &env,
                             std::span<const SyntheticQuestion> questions,
                             std::span<const PolicyTable> policies,
                             const MetricConfig &metric,
                             std::string arm);

struct TrainedEnsemble {
  AgentUncertaintyProfile warmup;
  CoefficientSet coeffs;
  TrainState state;
  std::optional<ReplayBuffer> buffer;
};

/// Warm-up, calibration and training on the clean environment.
TrainedEnsemble train_ensemble(const ExperimentConfig &config,
                               const QuestionSets &questions,
                               std::optional<RewardComponent> zeroed = std::nullopt);

struct BaselineResult {
  Evaluation eval;
  Artifacts artifacts;
};

struct StratumGain {
  double lo{};
  double hi{};
  std::size_t count{};
  std::optional<double> baseline_accuracy;
  std::optional<double> trained_accuracy;
};

struct UdpoResult {
  Evaluation baseline;
  Evaluation trained;
  TrainedEnsemble ensemble;
  std::vector<StratumGain> strata_gain;
  Artifacts artifacts;
};

struct AttackResult {
  std::vector<EvalSummary> rows;
  Artifacts artifacts;
};

struct AnalysisResult {
  std::vector<OutcomeRecord> records;
  std::size_t excluded{};
  std::optional<SeparationReport> separation;
  std::optional<CorrelationMatrix> correlation;
  std::vector<SelectivePoint> selective;
  std::vector<Stratum> strata;
  Artifacts artifacts;
};

struct SweepResult {
  std::vector<EvalSummary> rows;
  Artifacts artifacts;
};

BaselineResult run_baseline(const ExperimentConfig &config);

UdpoResult run_udpo(const ExperimentConfig &config, std::optional<RewardComponent> zeroed = std::nullopt);

/// Trains once on clean debates, then evaluates untrained and trained
/// ensembles with each m in `compromised` adversaries. m == N is allowed with
/// a warning; m > N throws.
AttackResult run_attack(const ExperimentConfig &config, std::span<const std::size_t> compromised);

/// Reports over already-rolled-out debates. Trajectories without ground
/// truth are excluded with a warning; degenerate reports are skipped with one.
AnalysisResult analyze_trajectories(std::span<const DebateTrajectory> trajectories, const ExperimentConfig &config);
AnalysisResult run_analysis(std::span<const std::filesystem::path> inputs, const ExperimentConfig &config);

SweepResult run_sweep(const ExperimentConfig &config);

}  // namespace madlab

#endif  // MADLAB_HARNESS_HPP
