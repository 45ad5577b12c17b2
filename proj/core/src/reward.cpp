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

#include "madlab/reward.hpp"

#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "madlab/metrics.hpp"

namespace madlab
{
namespace
{

void
check_coefficients(const std::vector<AgentCoefficients> &per_agent)
{
  for (std::size_t i = 0; i < per_agent.size(); ++i) {
    const auto &c = per_agent[i];
    for (const double v : {c.alpha, c.beta, c.gamma, c.lambda_task, c.eta_anchor}) {
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(fmt::format("coefficients of agent {} must be finite and non-negative", i));
      }
    }
  }
}

}  // namespace

CoefficientSet::CoefficientSet(std::vector<AgentCoefficients> per_agent) : per_agent_{std::move(per_agent)}
{
  check_coefficients(per_agent_);
}

CoefficientSet::CoefficientSet(std::size_t num_agents, const AgentCoefficients &shared)
    : per_agent_(num_agents, shared)
{
  check_coefficients(per_agent_);
}

std::optional<RewardComponent>
parse_reward_component(std::string_view name)
{
  if (name == "alpha" || name == "intra") return RewardComponent::kIntra;
  if (name == "beta" || name == "inter") return RewardComponent::kInter;
  if (name == "gamma" || name == "sys") return RewardComponent::kSys;
  return std::nullopt;
}

CoefficientSet
zero_component(const CoefficientSet &coeffs, RewardComponent component)
{
  auto per_agent = coeffs.agents();
  for (auto &c : per_agent) {
    switch (component) {
      case RewardComponent::kIntra:
        c.alpha = 0.0;
        break;
      case RewardComponent::kInter:
        c.beta = 0.0;
        break;
      case RewardComponent::kSys:
        c.gamma = 0.0;
        break;
    }
  }
  return CoefficientSet(std::move(per_agent));
}

double
reward_intra(const DebateTrajectory &trajectory)
{
  return 1.0 - flip_rate(trajectory);
}

double
reward_inter(const DebateTrajectory &trajectory)
{
  return 1.0 - inter_uncertainty(trajectory);
}

double
reward_sys(const DebateTrajectory &trajectory)
{
  return 1.0 - system_uncertainty(trajectory);
}

int
reward_task(const DebateTrajectory &trajectory)
{
  if (!trajectory.ground_truth()) throw Error("unsupervised trajectory");
  return majority_vote(trajectory.final_round()).winner == *trajectory.ground_truth() ? 1 : 0;
}

RewardVector
total_reward(const DebateTrajectory &trajectory, const CoefficientSet &coeffs)
{
  if (coeffs.size() != trajectory.num_agents()) {
    throw Error(fmt::format("{} coefficient entries for {} agents", coeffs.size(), trajectory.num_agents()));
  }
  RewardVector r;
  r.r_intra = reward_intra(trajectory);
  r.r_inter = reward_inter(trajectory);
  r.r_sys = reward_sys(trajectory);
  r.r_task = reward_task(trajectory);
  r.total.reserve(coeffs.size());
  for (const auto &c : coeffs.agents()) {
    r.total.push_back(c.alpha * r.r_intra + c.beta * r.r_inter + c.gamma * r.r_sys + c.lambda_task * r.r_task);
  }
  return r;
}

}  // namespace madlab
