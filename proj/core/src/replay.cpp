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

#include "madlab/replay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "madlab/reward.hpp"
#include "madlab/trajectory_io.hpp"

namespace madlab
{

double
replay_score(const DebateTrajectory &trajectory, const ReplayWeights &weights)
{
  return weights.alpha * (1.0 - reward_intra(trajectory)) + weights.beta * (1.0 - reward_inter(trajectory)) +
         weights.gamma * (1.0 - reward_sys(trajectory));
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, double priority_exponent)
    : capacity_{capacity}, priority_exponent_{priority_exponent}
{
  if (capacity_ == 0) throw ConfigError("replay.capacity must be positive");
  if (!(priority_exponent_ >= 0.0) || !std::isfinite(priority_exponent_)) {
    throw ConfigError("replay.priority_exponent must be finite and >= 0");
  }
}

void
ReplayBuffer::push(ReplayEntry entry)
{
  if (!(entry.score >= 0.0)) throw Error("replay scores must be non-negative");
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(entry));
}

void
ReplayBuffer::replace(std::size_t i, ReplayEntry entry)
{
  if (!(entry.score >= 0.0)) throw Error("replay scores must be non-negative");
  entries_.at(i) = std::move(entry);
}

std::vector<double>
ReplayBuffer::probabilities() const
{
  if (entries_.empty()) throw Error("replay buffer is empty");
  std::vector<double> p;
  p.reserve(entries_.size());
  double total = 0.0;
  for (const auto &e : entries_) {
    // 0^0 is taken as 1, which makes eta = 0 uniform.
    p.push_back(e.score > 0.0 ? std::pow(e.score, priority_exponent_) : (priority_exponent_ == 0.0 ? 1.0 : 0.0));
    total += p.back();
  }
  if (total <= 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return p;
  }
  for (auto &v : p) v /= total;
  return p;
}

double
ReplayBuffer::mean_score() const
{
  if (entries_.empty()) return 0.0;
  double total = 0.0;
  for (const auto &e : entries_) total += e.score;
  return total / static_cast<double>(entries_.size());
}

std::vector<ReplayDraw>
replay_sample(const ReplayBuffer &buffer, std::size_t count, RandomStream &stream)
{
  const auto p = buffer.probabilities();
  std::vector<double> cumulative(p.size());
  std::partial_sum(p.begin(), p.end(), cumulative.begin());

  std::vector<ReplayDraw> draws;
  draws.reserve(count);
  const double uniform_mass = 1.0 / static_cast<double>(p.size());
  double weight_sum = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    const double u = stream.uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto index = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                                   static_cast<std::ptrdiff_t>(p.size()) - 1));
    draws.push_back({index, uniform_mass / p[index]});
    weight_sum += draws.back().weight;
  }
  if (count > 0) {
    const double mean = weight_sum / static_cast<double>(count);
    for (auto &d : draws) d.weight /= mean;
  }
  return draws;
}

void
buffer_refresh(ReplayBuffer &buffer,
               const DebateEnvironment &env,
               std::span<const SyntheticQuestion> questions,
               std::span<const PolicyTable> policies,
               std::uint64_t policy_version,
               std::uint64_t salt,
               const ReplayWeights &weights)
{
  std::map<std::string, const SyntheticQuestion *> by_id;
  for (const auto &q : questions) by_id.emplace(q.id, &q);

  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const auto &old = buffer[i];
    const auto it = by_id.find(old.trajectory.question_id());
    if (it == by_id.end()) {
      throw Error(fmt::format("replay refresh: unknown question '{}'", old.trajectory.question_id()));
    }
    auto trajectory = env.rollout(*it->second, policies, combine_key(salt, i));
    const double score = replay_score(trajectory, weights);
    buffer.replace(i, {std::move(trajectory), score, old.iteration, policy_version});
  }
}

void
write_replay_buffer(std::ostream &out, const ReplayBuffer &buffer)
{
  for (const auto &e : buffer.entries()) {
    out << format_trajectory_line(e.trajectory, e.score, static_cast<std::int64_t>(e.policy_version)) << '\n';
  }
}

void
write_replay_buffer_file(const std::filesystem::path &path, const ReplayBuffer &buffer)
{
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  write_replay_buffer(out, buffer);
}

ReplayBuffer
read_replay_buffer(std::istream &in, std::size_t capacity, double priority_exponent)
{
  ReplayBuffer buffer(capacity, priority_exponent);
  std::size_t n = 0;
  for (auto &line : read_trajectory_lines(in)) {
    ++n;
    if (!line.replay_score || !line.policy_version) {
      throw ParseError(fmt::format("replay entry {} lacks replay_score or policy_version", n));
    }
    if (*line.policy_version < 0) throw ParseError(fmt::format("replay entry {} has a negative policy_version", n));
    buffer.push({std::move(line.trajectory), *line.replay_score, 0, static_cast<std::uint64_t>(*line.policy_version)});
  }
  return buffer;
}

}  // namespace madlab
