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

#ifndef MADLAB_UDPO_HPP
#define MADLAB_UDPO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "madlab/metrics.hpp"
#include "madlab/replay.hpp"
#include "madlab/reward.hpp"
#include "madlab/sim.hpp"

namespace madlab
{

struct ClipConfig {
  double epsilon{0.2};
  double learn_rate{1.0};
  std::size_t batch_size{32};
  std::size_t iterations{200};
  /// Iterations between reference refreshes.
  std::size_t ref_refresh_period{1};

  void validate() const;
};

/// Per-agent mean baselines and the resulting advantages.
struct AdvantageEstimate {
  std::vector<double> baseline;                 ///< [agent]
  std::vector<std::vector<double>> advantages;  ///< [agent][sample]
};

/// `rewards[i][m]` is agent i's total reward on batch sample m.
AdvantageEstimate compute_advantages(const std::vector<std::vector<double>> &rewards);

/// exp(log pi_current(tau) - log pi_reference(tau)) for agent i.
double likelihood_ratio(const DebateEnvironment &env,
                        const SyntheticQuestion &question,
                        std::size_t agent,
                        const PolicyTable &current,
                        const PolicyTable &reference,
                        const DebateTrajectory &trajectory);

/// min(rho A, clip(rho, 1 - eps, 1 + eps) A).
double clipped_surrogate(double rho, double advantage, double epsilon);

/// Mean over the agent's T + 1 visited contexts of KL(current || reference).
double kl_anchor(const DebateEnvironment &env,
                 const SyntheticQuestion &question,
                 std::size_t agent,
                 const PolicyTable &current,
                 const PolicyTable &reference,
                 const DebateTrajectory &trajectory);

struct BatchSample {
  SyntheticQuestion question;
  DebateTrajectory trajectory;
  RewardVector rewards;
  /// Importance weight; 1 for fresh rollouts.
  double weight{1.0};
};

/// Rollouts generated under one reference snapshot.
struct Batch {
  std::vector<BatchSample> samples;
  std::uint64_t reference_version{};
  AdvantageEstimate advantages;
};

/// Scores `samples` with `coeffs` and computes per-agent advantages.
Batch make_batch(std::vector<BatchSample> samples, const CoefficientSet &coeffs, std::uint64_t reference_version);

/// Per-agent objective: mean weighted clipped surrogate minus eta times the
/// mean weighted KL anchor. Entries of compromised agents are 0.
std::vector<double> objective_value(const DebateEnvironment &env,
                                    const Batch &batch,
                                    std::span<const PolicyTable> current,
                                    std::span<const PolicyTable> reference,
                                    const CoefficientSet &coeffs,
                                    const ClipConfig &clip);

/// Analytic gradient of each agent's objective with respect to its table
/// logits. The surrogate uses the score-function form and contributes nothing
/// where the clipped branch is active; the KL term is exact.
std::vector<PolicyTable> objective_gradient(const DebateEnvironment &env,
                                            const Batch &batch,
                                            std::span<const PolicyTable> current,
                                            std::span<const PolicyTable> reference,
                                            const CoefficientSet &coeffs,
                                            const ClipConfig &clip);

struct IterationMetrics {
  std::size_t iteration{};
  double accuracy{};
  double mean_u_intra{};
  double mean_u_inter{};
  double mean_u_sys{};
  double mean_total_reward{};
};

struct TrainState {
  std::vector<PolicyTable> current;
  std::vector<PolicyTable> reference;
  CoefficientSet coeffs;
  std::size_t iteration{};
  std::uint64_t policy_version{};
  std::uint64_t reference_version{};
  std::vector<IterationMetrics> history;

  /// Zero tables for every agent, reference equal to current.
  static TrainState initial(const DebateEnvironment &env, CoefficientSet coeffs);

  void refresh_reference();
};

/// One ascent step on every honest agent's objective. Throws "stale rollouts"
/// when the batch was not generated under the state's reference.
TrainState gradient_step(TrainState state, const DebateEnvironment &env, const Batch &batch, const ClipConfig &clip);

struct ReplaySettings {
  /// Share of each batch drawn from the buffer.
  double fraction{0.25};
  std::size_t refresh_period{10};
  ReplayWeights weights;
};

struct TrainOptions {
  ClipConfig clip;
  MetricConfig metric;
  std::optional<ReplaySettings> replay;
  std::uint64_t seed{1};
};

/// Runs the full training loop over `pool`. When `buffer` is non-null and
/// options.replay is set, part of each batch is replayed from it.
TrainState train(const DebateEnvironment &env,
                 std::span<const SyntheticQuestion> pool,
                 TrainState initial,
                 const TrainOptions &options,
                 ReplayBuffer *buffer = nullptr);

/// `iter,accuracy,mean_U_intra,mean_U_inter,mean_U_sys,mean_total_reward`
std::string training_metrics_header();
std::string format_training_metrics_row(const IterationMetrics &metrics);

/// Versioned text format: header comments, then `context-key<TAB>logits`.
void write_policy(std::ostream &out,
                  const PolicyTable &policy,
                  std::span<const std::string> answer_space,
                  std::uint64_t config_hash);
void write_policy_file(const std::filesystem::path &path,
                       const PolicyTable &policy,
                       std::span<const std::string> answer_space,
                       std::uint64_t config_hash);
PolicyTable read_policy(std::istream &in);

}  // namespace madlab

#endif  // MADLAB_UDPO_HPP
