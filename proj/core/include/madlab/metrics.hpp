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

#ifndef MADLAB_METRICS_HPP
#define MADLAB_METRICS_HPP

#include <string>
#include <vector>

#include "madlab/debate.hpp"

namespace madlab
{

struct MetricConfig {
  /// Weight of the flip rate against the belief revision rate in U_intra.
  double lambda_mix{0.5};

  /// Throws ConfigError unless lambda_mix lies in [0, 1].
  void validate() const;
};

/// Uncertainty of one debate at the intra-agent, inter-agent and system level.
struct UncertaintyProfile {
  double flip_rate{};
  double belief_revision{};
  double u_intra{};
  std::vector<double> round_conflicts;
  double u_inter{};
  double entropy_norm{};
  int disagreement{};
  double loo_instability{};
  double u_sys{};
};

/// Fraction of the N*T adjacent-round transitions where an agent changes its
/// answer. All T transitions (t = 0..T-1) count, so F is in [0, 1].
double flip_rate(const DebateTrajectory &trajectory);

/// Fraction of agents whose final answer differs from their initial one.
double belief_revision_rate(const DebateTrajectory &trajectory);

double intra_uncertainty(const DebateTrajectory &trajectory, const MetricConfig &config);

/// Fraction of agent pairs that disagree in round t (0 <= t <= T).
double round_conflict(const DebateTrajectory &trajectory, std::size_t t);

/// Mean pairwise conflict over all T + 1 rounds.
double inter_uncertainty(const DebateTrajectory &trajectory);

/// Shannon entropy of the final-round answers normalized by log K, where K is
/// the number of distinct final answers. Zero when the final round has a
/// single distinct answer.
double normalized_entropy(const DebateTrajectory &trajectory);

/// 1 when any final-round answer differs from the rest, else 0.
int disagreement_indicator(const DebateTrajectory &trajectory);

/// Fraction of agents whose removal changes the final majority vote.
double loo_instability(const DebateTrajectory &trajectory);

/// (H + D + L) / 3 over the final round.
double system_uncertainty(const DebateTrajectory &trajectory);

UncertaintyProfile full_profile(const DebateTrajectory &trajectory, const MetricConfig &config);

/// `question_id,F,M,U_intra,U_inter,H,D,L,U_sys`
std::string profile_csv_header();

/// One CSV row with 6-decimal fixed formatting, no trailing newline.
std::string format_profile_csv_row(const std::string &question_id, const UncertaintyProfile &profile);

}  // namespace madlab

#endif  // MADLAB_METRICS_HPP
