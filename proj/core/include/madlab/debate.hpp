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

#ifndef MADLAB_DEBATE_HPP
#define MADLAB_DEBATE_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "madlab/error.hpp"

namespace madlab
{

/// Position of an answer inside its question's declared answer space.
///
/// The declaration order of the answer space is the total order used for
/// deterministic tie-breaking, so comparing labels compares positions.
struct AnswerLabel {
  std::uint16_t index{};

  constexpr auto operator<=>(const AnswerLabel &) const = default;
};

/// Raw, unvalidated trajectory as read from disk or assembled by hand.
struct TrajectoryRecord {
  std::string question_id;
  std::vector<std::string> answer_space;
  std::optional<std::string> ground_truth;
  std::vector<std::vector<std::string>> rounds;
};

struct Violation {
  enum class Kind { kMissingEntry, kOutOfSpace, kTooFewRounds, kTooFewAgents, kBadAnswerSpace };

  Kind kind;
  /// Round and agent of the offending cell, when the violation has one.
  std::optional<std::size_t> round;
  std::optional<std::size_t> agent;
  std::string message;
};

/// Returns every invariant violation of `record`; empty means valid.
std::vector<Violation> validate_trajectory(const TrajectoryRecord &record);

/// Complete (T+1) x N grid of answers for one question.
///
/// Immutable after construction. Round 0 holds the pre-debate answers, so a
/// trajectory with `rounds() == T` stores `T + 1` rows.
class DebateTrajectory
{
 public:
  /// Throws InvalidTrajectory listing every violation.
  static DebateTrajectory from_record(const TrajectoryRecord &record);

  /// Builds directly from label indices; `grid[t][i]` is agent i in round t.
  DebateTrajectory(std::string question_id,
                   std::vector<std::string> answer_space,
                   std::vector<std::vector<AnswerLabel>> grid,
                   std::optional<AnswerLabel> ground_truth);

  [[nodiscard]] const std::string &question_id() const noexcept { return question_id_; }
  [[nodiscard]] const std::vector<std::string> &answer_space() const noexcept { return answer_space_; }
  [[nodiscard]] std::size_t answer_space_size() const noexcept { return answer_space_.size(); }
  [[nodiscard]] const std::optional<AnswerLabel> &ground_truth() const noexcept { return ground_truth_; }

  /// Number of debate rounds T (the grid has T + 1 rows).
  [[nodiscard]] std::size_t rounds() const noexcept { return num_rows_ - 1; }
  [[nodiscard]] std::size_t num_agents() const noexcept { return num_agents_; }

  [[nodiscard]] AnswerLabel at(std::size_t round, std::size_t agent) const;
  [[nodiscard]] std::span<const AnswerLabel> round(std::size_t t) const;
  [[nodiscard]] std::span<const AnswerLabel> final_round() const { return round(rounds()); }

  [[nodiscard]] const std::string &label_name(AnswerLabel label) const;
  [[nodiscard]] TrajectoryRecord to_record() const;

  friend bool operator==(const DebateTrajectory &, const DebateTrajectory &) = default;

 private:
  std::string question_id_;
  std::vector<std::string> answer_space_;
  std::vector<AnswerLabel> cells_;
  std::size_t num_rows_{};
  std::size_t num_agents_{};
  std::optional<AnswerLabel> ground_truth_;
};

struct VoteOutcome {
  AnswerLabel winner;
  std::map<AnswerLabel, std::size_t> counts;
  bool was_tie{};
};

/// Plurality vote; ties go to the order-minimal label. Throws on no voters.
VoteOutcome majority_vote(std::span<const AnswerLabel> answers);

/// Empirical distribution of the final-round answers.
std::map<AnswerLabel, double> final_answer_distribution(const DebateTrajectory &trajectory);

/// Entry i is the final-round vote with agent i removed.
std::vector<VoteOutcome> leave_one_out_votes(const DebateTrajectory &trajectory);

}  // namespace madlab

#endif  // MADLAB_DEBATE_HPP
