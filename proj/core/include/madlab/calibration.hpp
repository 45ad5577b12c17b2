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

#ifndef MADLAB_CALIBRATION_HPP
#define MADLAB_CALIBRATION_HPP

#include <span>
#include <vector>

#include "madlab/debate.hpp"
#include "madlab/metrics.hpp"
#include "madlab/reward.hpp"
#include "madlab/sim.hpp"

namespace madlab
{

/// Warm-up averages for one agent.
struct AgentUncertainty {
  double u_intra_bar{};  ///< own flip/revision mix
  double u_inter_bar{};  ///< disagreement over pairs that include the agent
  double loo_bar{};      ///< how often removing the agent changes the vote
  double u_sys_bar{};    ///< mean of the three above
};

using AgentUncertaintyProfile = std::vector<AgentUncertainty>;

struct CalibrationConfig {
  double kappa{1.5};
  double alpha_base{1.0};
  double beta_base{1.0};
  double gamma_base{1.0};
  double lambda_base{1.0};
  double eta_base{0.01};
  double warmup_fraction{0.1};

  void validate() const;
};

/// Per-agent uncertainty averaged over the warm-up trajectories.
AgentUncertaintyProfile warmup_profile(std::span<const DebateTrajectory> warmup,
                                       std::size_t agent_count,
                                       const MetricConfig &metric = {});

/// Uncertain agents get larger stability weights, a smaller task weight and
/// stronger anchoring:
///   alpha = alpha_base (1 + kappa U_intra)    beta  = beta_base (1 + kappa U_inter)
///   gamma = gamma_base (1 + kappa L)          eta   = eta_base (1 + kappa U_sys)
///   lambda = lambda_base / (1 + kappa U_sys)
CoefficientSet calibrate_coefficients(const AgentUncertaintyProfile &profile, const CalibrationConfig &config);

/// Every agent gets the base coefficients.
CoefficientSet base_coefficients(std::size_t agent_count, const CalibrationConfig &config);

struct WarmupSplit {
  std::vector<SyntheticQuestion> warmup;
  std::vector<SyntheticQuestion> train;
};

/// The first ceil(fraction * n) questions (at least one, at most n - 1) form
/// the warm-up set; the rest are the training pool.
WarmupSplit split_warmup(std::span<const SyntheticQuestion> questions, double fraction);

}  // namespace madlab

#endif  // MADLAB_CALIBRATION_HPP
