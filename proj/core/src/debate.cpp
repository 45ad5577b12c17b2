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

#include "madlab/debate.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <utility>

#include <fmt/format.h>

namespace madlab
{
namespace
{

std::optional<std::size_t>
find_label(const std::vector<std::string> &space, const std::string &name)
{
  const auto it = std::find(space.begin(), space.end(), name);
  if (it == space.end()) return std::nullopt;
  return static_cast<std::size_t>(it - space.begin());
}

std::string
join_violations(const std::vector<Violation> &violations)
{
  std::string out;
  for (const auto &v : violations) {
    if (!out.empty()) out += "; ";
    out += v.message;
  }
  return out;
}

}  // namespace

std::vector<Violation>
validate_trajectory(const TrajectoryRecord &record)
{
  std::vector<Violation> out;
  const auto &space = record.answer_space;

  if (space.size() < 2) {
    out.push_back({Violation::Kind::kBadAnswerSpace, {}, {}, "answer space needs at least 2 labels"});
  }
  if (std::set<std::string>(space.begin(), space.end()).size() != space.size()) {
    out.push_back({Violation::Kind::kBadAnswerSpace, {}, {}, "answer space has duplicate labels"});
  }
  if (space.size() > std::numeric_limits<std::uint16_t>::max()) {
    out.push_back({Violation::Kind::kBadAnswerSpace, {}, {}, "answer space too large"});
  }
  if (record.rounds.size() < 2) {
    out.push_back({Violation::Kind::kTooFewRounds, {}, {},
                   fmt::format("need at least 2 rows (T >= 1), got {}", record.rounds.size())});
  }

  std::size_t num_agents = 0;
  for (const auto &row : record.rounds) num_agents = std::max(num_agents, row.size());
  if (num_agents < 2) {
    out.push_back({Violation::Kind::kTooFewAgents, {}, {},
                   fmt::format("need at least 2 agents, got {}", num_agents)});
  }

  for (std::size_t t = 0; t < record.rounds.size(); ++t) {
    const auto &row = record.rounds[t];
    for (std::size_t i = 0; i < num_agents; ++i) {
      if (i >= row.size()) {
        out.push_back({Violation::Kind::kMissingEntry, t, i,
                       fmt::format("missing answer at (t={}, i={})", t, i)});
      } else if (!find_label(space, row[i])) {
        out.push_back({Violation::Kind::kOutOfSpace, t, i,
                       fmt::format("answer '{}' at (t={}, i={}) is not in the answer space", row[i], t, i)});
      }
    }
  }

  if (record.ground_truth && !find_label(space, *record.ground_truth)) {
    out.push_back({Violation::Kind::kOutOfSpace, {}, {},
                   fmt::format("ground truth '{}' is not in the answer space", *record.ground_truth)});
  }
  return out;
}

DebateTrajectory
DebateTrajectory::from_record(const TrajectoryRecord &record)
{
  if (const auto violations = validate_trajectory(record); !violations.empty()) {
    throw InvalidTrajectory(join_violations(violations));
  }
  std::vector<std::vector<AnswerLabel>> grid;
  grid.reserve(record.rounds.size());
  for (const auto &row : record.rounds) {
    auto &out = grid.emplace_back();
    out.reserve(row.size());
    for (const auto &name : row) {
      out.push_back(AnswerLabel{static_cast<std::uint16_t>(*find_label(record.answer_space, name))});
    }
  }
  std::optional<AnswerLabel> truth;
  if (record.ground_truth) {
    truth = AnswerLabel{static_cast<std::uint16_t>(*find_label(record.answer_space, *record.ground_truth))};
  }
  return DebateTrajectory(record.question_id, record.answer_space, std::move(grid), truth);
}

DebateTrajectory::DebateTrajectory(std::string question_id,
                                   std::vector<std::string> answer_space,
                                   std::vector<std::vector<AnswerLabel>> grid,
                                   std::optional<AnswerLabel> ground_truth)
    : question_id_{std::move(question_id)},
      answer_space_{std::move(answer_space)},
      num_rows_{grid.size()},
      num_agents_{grid.empty() ? 0 : grid.front().size()},
      ground_truth_{ground_truth}
{
  if (answer_space_.size() < 2) throw InvalidTrajectory("answer space needs at least 2 labels");
  if (num_rows_ < 2) throw InvalidTrajectory("need at least 2 rows (T >= 1)");
  if (num_agents_ < 2) throw InvalidTrajectory("need at least 2 agents");

  cells_.reserve(num_rows_ * num_agents_);
  for (std::size_t t = 0; t < num_rows_; ++t) {
    if (grid[t].size() != num_agents_) {
      throw InvalidTrajectory(fmt::format("round {} has {} answers, expected {}", t, grid[t].size(), num_agents_));
    }
    for (const auto label : grid[t]) {
      if (label.index >= answer_space_.size()) {
        throw InvalidTrajectory(fmt::format("label index {} out of answer space in round {}", label.index, t));
      }
      cells_.push_back(label);
    }
  }
  if (ground_truth_ && ground_truth_->index >= answer_space_.size()) {
    throw InvalidTrajectory("ground truth out of answer space");
  }
}

AnswerLabel
DebateTrajectory::at(std::size_t round, std::size_t agent) const
{
  if (round >= num_rows_ || agent >= num_agents_) {
    throw std::out_of_range(fmt::format("cell (t={}, i={}) out of range", round, agent));
  }
  return cells_[round * num_agents_ + agent];
}

std::span<const AnswerLabel>
DebateTrajectory::round(std::size_t t) const
{
  if (t >= num_rows_) throw std::out_of_range(fmt::format("round {} out of range (T={})", t, rounds()));
  return std::span<const AnswerLabel>(cells_).subspan(t * num_agents_, num_agents_);
}

const std::string &
DebateTrajectory::label_name(AnswerLabel label) const
{
  return answer_space_.at(label.index);
}

TrajectoryRecord
DebateTrajectory::to_record() const
{
  TrajectoryRecord record{question_id_, answer_space_, std::nullopt, {}};
  if (ground_truth_) record.ground_truth = label_name(*ground_truth_);
  for (std::size_t t = 0; t < num_rows_; ++t) {
    auto &row = record.rounds.emplace_back();
    for (const auto label : round(t)) row.push_back(label_name(label));
  }
  return record;
}

VoteOutcome
majority_vote(std::span<const AnswerLabel> answers)
{
  if (answers.empty()) throw Error("no voters");

  VoteOutcome outcome;
  for (const auto label : answers) ++outcome.counts[label];

  // std::map iterates in label order, so the first maximum is order-minimal.
  std::size_t best = 0;
  std::size_t num_best = 0;
  for (const auto &[label, count] : outcome.counts) {
    if (count > best) {
      best = count;
      num_best = 1;
      outcome.winner = label;
    } else if (count == best) {
      ++num_best;
    }
  }
  outcome.was_tie = num_best > 1;
  return outcome;
}

std::map<AnswerLabel, double>
final_answer_distribution(const DebateTrajectory &trajectory)
{
  const auto final = trajectory.final_round();
  std::map<AnswerLabel, std::size_t> counts;
  for (const auto label : final) ++counts[label];

  std::map<AnswerLabel, double> dist;
  const auto n = static_cast<double>(final.size());
  for (const auto &[label, count] : counts) dist[label] = static_cast<double>(count) / n;
  return dist;
}

std::vector<VoteOutcome>
leave_one_out_votes(const DebateTrajectory &trajectory)
{
  const auto final = trajectory.final_round();
  if (final.size() < 2) throw Error("degenerate ensemble");

  std::vector<VoteOutcome> out;
  out.reserve(final.size());
  std::vector<AnswerLabel> rest;
  rest.reserve(final.size() - 1);
  for (std::size_t i = 0; i < final.size(); ++i) {
    rest.clear();
    for (std::size_t j = 0; j < final.size(); ++j) {
      if (j != i) rest.push_back(final[j]);
    }
    out.push_back(majority_vote(rest));
  }
  return out;
}

}  // namespace madlab
