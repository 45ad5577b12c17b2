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

#ifndef MADLAB_REWARD_HPP
#define MADLAB_REWARD_HPP

#include <optional>
#include <string_view>
#include <vector>

#include "madlab/debate.hpp"

namespace madlab
{

/// Reward and anchoring weights of a single agent.
struct AgentCoefficients {
  double alpha{1.0};        ///< intra-agent stability
  double beta{1.0};         ///< inter-agent agreement
  double gamma{1.0};        ///< system-level confidence
  double lambda_task{1.0};  ///< task correctness
  double eta_anchor{0.01};  ///< KL anchoring toward the reference policy
};

/// One entry per agent, indexed like the trajectory's agents.
class CoefficientSet
{
 public:
  CoefficientSet() = default;
  explicit CoefficientSet(std::vector<AgentCoefficients> per_agent);
  CoefficientSet(std::size_t num_agents, const AgentCoefficients &shared);

  [[nodiscard]] std::size_t size() const noexcept { return per_agent_.size(); }
  [[nodiscard]] const AgentCoefficients &operator[](std::size_t i) const { return per_agent_.at(i); }
  [[nodiscard]] const std::vector<AgentCoefficients> &agents() const noexcept { return per_agent_; }

 private:
  std::vector<AgentCoefficients> per_agent_;
};

/// Uncertainty-driven reward components that can be ablated.
enum class RewardComponent { kIntra, kInter, kSys };

std::optional<RewardComponent> parse_reward_component(std::string_view name);

/// Copy of `coeffs` with the component's weight set to zero for every agent.
CoefficientSet zero_component(const CoefficientSet &coeffs, RewardComponent component);

struct RewardVector {
  double r_intra{};
  double r_inter{};
  double r_sys{};
  int r_task{};
  std::vector<double> total;
};

double reward_intra(const DebateTrajectory &trajectory);
double reward_inter(const DebateTrajectory &trajectory);
double reward_sys(const DebateTrajectory &trajectory);

/// 1 when the final majority vote matches the ground truth. Throws
/// "unsupervised trajectory" when there is no ground truth.
int reward_task(const DebateTrajectory &trajectory);

RewardVector total_reward(const DebateTrajectory &trajectory, const CoefficientSet &coeffs);

}  // namespace madlab

#endif  // MADLAB_REWARD_HPP
