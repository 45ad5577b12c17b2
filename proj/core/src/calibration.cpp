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

#include "madlab/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace madlab
{

void
CalibrationConfig::validate() const
{
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("udpo.kappa must be finite and >= 0");
  const std::pair<const char *, double> bases[] = {{"alpha_base", alpha_base},
                                                   {"beta_base", beta_base},
                                                   {"gamma_base", gamma_base},
                                                   {"lambda_base", lambda_base},
                                                   {"eta_base", eta_base}};
  for (const auto &[name, value] : bases) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ConfigError(fmt::format("udpo.{} must be finite and > 0, got {}", name, value));
    }
  }
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
    throw ConfigError(fmt::format("udpo.warmup_fraction must lie in (0, 1), got {}", warmup_fraction));
  }
}

AgentUncertaintyProfile
warmup_profile(std::span<const DebateTrajectory> warmup, std::size_t agent_count, const MetricConfig &metric)
{
  if (warmup.empty()) throw Error("warm-up set is empty");
  metric.validate();

  AgentUncertaintyProfile profile(agent_count);
  for (const auto &trajectory : warmup) {
    if (trajectory.num_agents() != agent_count) {
      throw Error(fmt::format("warm-up trajectory {} has {} agents, expected {}",
                              trajectory.question_id(), trajectory.num_agents(), agent_count));
    }
    const auto rounds = trajectory.rounds();
    const auto full = majority_vote(trajectory.final_round()).winner;
    const auto partial = leave_one_out_votes(trajectory);

    for (std::size_t i = 0; i < agent_count; ++i) {
      std::size_t flips = 0;
      for (std::size_t t = 0; t < rounds; ++t) flips += trajectory.at(t, i) != trajectory.at(t + 1, i) ? 1 : 0;
      const double flip = static_cast<double>(flips) / static_cast<double>(rounds);
      const double revised = trajectory.at(0, i) != trajectory.at(rounds, i) ? 1.0 : 0.0;

      std::size_t conflicts = 0;
      for (std::size_t t = 0; t <= rounds; ++t) {
        for (std::size_t j = 0; j < agent_count; ++j) {
          if (j != i) conflicts += trajectory.at(t, i) != trajectory.at(t, j) ? 1 : 0;
        }
      }
      const double pairs = static_cast<double>((rounds + 1) * (agent_count - 1));

      auto &p = profile[i];
      p.u_intra_bar += metric.lambda_mix * flip + (1.0 - metric.lambda_mix) * revised;
      p.u_inter_bar += static_cast<double>(conflicts) / pairs;
      p.loo_bar += partial[i].winner != full ? 1.0 : 0.0;
    }
  }

  const auto n = static_cast<double>(warmup.size());
  for (auto &p : profile) {
    p.u_intra_bar /= n;
    p.u_inter_bar /= n;
    p.loo_bar /= n;
    p.u_sys_bar = (p.u_intra_bar + p.u_inter_bar + p.loo_bar) / 3.0;
  }
  return profile;
}

CoefficientSet
calibrate_coefficients(const AgentUncertaintyProfile &profile, const CalibrationConfig &config)
{
  config.validate();
  std::vector<AgentCoefficients> out;
  out.reserve(profile.size());
  const double k = config.kappa;
  for (const auto &p : profile) {
    out.push_back({config.alpha_base * (1.0 + k * p.u_intra_bar),
                   config.beta_base * (1.0 + k * p.u_inter_bar),
                   config.gamma_base * (1.0 + k * p.loo_bar),
                   config.lambda_base / (1.0 + k * p.u_sys_bar),
                   config.eta_base * (1.0 + k * p.u_sys_bar)});
  }
  return CoefficientSet(std::move(out));
}

CoefficientSet
base_coefficients(std::size_t agent_count, const CalibrationConfig &config)
{
  config.validate();
  return CoefficientSet(
      agent_count,
      {config.alpha_base, config.beta_base, config.gamma_base, config.lambda_base, config.eta_base});
}

WarmupSplit
split_warmup(std::span<const SyntheticQuestion> questions, double fraction)
{
  if (questions.size() < 2) throw Error("need at least 2 questions to split off a warm-up set");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("warm-up fraction must lie in (0, 1)");
  auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(questions.size()) - 1e-9));
  count = std::clamp<std::size_t>(count, 1, questions.size() - 1);
  return {{questions.begin(), questions.begin() + static_cast<std::ptrdiff_t>(count)},
          {questions.begin() + static_cast<std::ptrdiff_t>(count), questions.end()}};
}

}  // namespace madlab
