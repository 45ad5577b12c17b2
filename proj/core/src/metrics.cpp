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

#include "madlab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace madlab
{

void
MetricConfig::validate() const
{
  if (!(lambda_mix >= 0.0 && lambda_mix <= 1.0)) {
    throw ConfigError(fmt::format("metric.lambda must lie in [0, 1], got {}", lambda_mix));
  }
}

double
flip_rate(const DebateTrajectory &trajectory)
{
  const auto rounds = trajectory.rounds();
  const auto agents = trajectory.num_agents();
  if (rounds < 1) throw Error("flip rate needs T >= 1");

  std::size_t flips = 0;
  for (std::size_t t = 0; t < rounds; ++t) {
    const auto now = trajectory.round(t);
    const auto next = trajectory.round(t + 1);
    for (std::size_t i = 0; i < agents; ++i) flips += now[i] != next[i] ? 1 : 0;
  }
  return static_cast<double>(flips) / static_cast<double>(agents * rounds);
}

double
belief_revision_rate(const DebateTrajectory &trajectory)
{
  const auto first = trajectory.round(0);
  const auto last = trajectory.final_round();
  std::size_t revised = 0;
  for (std::size_t i = 0; i < first.size(); ++i) revised += first[i] != last[i] ? 1 : 0;
  return static_cast<double>(revised) / static_cast<double>(first.size());
}

double
intra_uncertainty(const DebateTrajectory &trajectory, const MetricConfig &config)
{
  config.validate();
  return config.lambda_mix * flip_rate(trajectory) + (1.0 - config.lambda_mix) * belief_revision_rate(trajectory);
}

double
round_conflict(const DebateTrajectory &trajectory, std::size_t t)
{
  if (t > trajectory.rounds()) {
    throw Error(fmt::format("round {} out of range (T={})", t, trajectory.rounds()));
  }
  const auto answers = trajectory.round(t);
  const auto n = answers.size();
  std::size_t conflicts = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) conflicts += answers[i] != answers[j] ? 1 : 0;
  }
  return 2.0 * static_cast<double>(conflicts) / static_cast<double>(n * (n - 1));
}

double
inter_uncertainty(const DebateTrajectory &trajectory)
{
  double sum = 0.0;
  for (std::size_t t = 0; t <= trajectory.rounds(); ++t) sum += round_conflict(trajectory, t);
  return sum / static_cast<double>(trajectory.rounds() + 1);
}

double
normalized_entropy(const DebateTrajectory &trajectory)
{
  const auto dist = final_answer_distribution(trajectory);
  if (dist.size() <= 1) return 0.0;
  double h = 0.0;
  for (const auto &[label, p] : dist) h -= p * std::log(p);
  return std::min(1.0, h / std::log(static_cast<double>(dist.size())));
}

int
disagreement_indicator(const DebateTrajectory &trajectory)
{
  const auto final = trajectory.final_round();
  for (const auto label : final) {
    if (label != final.front()) return 1;
  }
  return 0;
}

double
loo_instability(const DebateTrajectory &trajectory)
{
  const auto full = majority_vote(trajectory.final_round()).winner;
  const auto partial = leave_one_out_votes(trajectory);
  std::size_t changed = 0;
  for (const auto &vote : partial) changed += vote.winner != full ? 1 : 0;
  return static_cast<double>(changed) / static_cast<double>(partial.size());
}

double
system_uncertainty(const DebateTrajectory &trajectory)
{
  return (normalized_entropy(trajectory) + disagreement_indicator(trajectory) + loo_instability(trajectory)) / 3.0;
}

UncertaintyProfile
full_profile(const DebateTrajectory &trajectory, const MetricConfig &config)
{
  config.validate();
  UncertaintyProfile p;
  p.flip_rate = flip_rate(trajectory);
  p.belief_revision = belief_revision_rate(trajectory);
  p.u_intra = config.lambda_mix * p.flip_rate + (1.0 - config.lambda_mix) * p.belief_revision;

  p.round_conflicts.reserve(trajectory.rounds() + 1);
  double conflict_sum = 0.0;
  for (std::size_t t = 0; t <= trajectory.rounds(); ++t) {
    p.round_conflicts.push_back(round_conflict(trajectory, t));
    conflict_sum += p.round_conflicts.back();
  }
  p.u_inter = conflict_sum / static_cast<double>(p.round_conflicts.size());

  p.entropy_norm = normalized_entropy(trajectory);
  p.disagreement = disagreement_indicator(trajectory);
  p.loo_instability = loo_instability(trajectory);
  p.u_sys = (p.entropy_norm + p.disagreement + p.loo_instability) / 3.0;
  return p;
}

std::string
profile_csv_header()
{
  return "question_id,F,M,U_intra,U_inter,H,D,L,U_sys";
}

std::string
format_profile_csv_row(const std::string &question_id, const UncertaintyProfile &p)
{
  return fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{:.6f},{:.6f}",
                     question_id,
                     p.flip_rate,
                     p.belief_revision,
                     p.u_intra,
                     p.u_inter,
                     p.entropy_norm,
                     p.disagreement,
                     p.loo_instability,
                     p.u_sys);
}

}  // namespace madlab
