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

#ifndef MADLAB_REPLAY_HPP
#define MADLAB_REPLAY_HPP

#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "madlab/debate.hpp"
#include "madlab/rng.hpp"
#include "madlab/sim.hpp"

namespace madlab
{

/// Weights of the composite replay score.
struct ReplayWeights {
  double alpha{1.0};
  double beta{1.0};
  double gamma{1.0};
};

/// U = alpha (1 - r_intra) + beta (1 - r_inter) + gamma (1 - r_sys).
double replay_score(const DebateTrajectory &trajectory, const ReplayWeights &weights);

struct ReplayEntry {
  DebateTrajectory trajectory;
  double score{};
  std::size_t iteration{};
  std::uint64_t policy_version{};
};

/// FIFO store of scored trajectories, sampled with p proportional to U^eta.
class ReplayBuffer
{
 public:
  explicit ReplayBuffer(std::size_t capacity = 1024, double priority_exponent = 1.0);

  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] double priority_exponent() const noexcept { return priority_exponent_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
  [[nodiscard]] const std::deque<ReplayEntry> &entries() const noexcept { return entries_; }
  [[nodiscard]] const ReplayEntry &operator[](std::size_t i) const { return entries_.at(i); }

  /// Appends, evicting the oldest entry when full.
  void push(ReplayEntry entry);
  void replace(std::size_t i, ReplayEntry entry);

  /// Sampling probabilities; uniform when every score is zero.
  [[nodiscard]] std::vector<double> probabilities() const;

  [[nodiscard]] double mean_score() const;

 private:
  std::size_t capacity_;
  double priority_exponent_;
  std::deque<ReplayEntry> entries_;
};

struct ReplayDraw {
  std::size_t index;
  /// (1/len) / p, rescaled so the draws' mean weight is 1.
  double weight;
};

/// `count` draws with replacement. Throws on an empty buffer.
std::vector<ReplayDraw> replay_sample(const ReplayBuffer &buffer, std::size_t count, RandomStream &stream);

/// Re-runs every stored question under `policies`, rescoring and stamping
/// entries with `policy_version`. `questions` must contain every stored id.
void buffer_refresh(ReplayBuffer &buffer,
                    const DebateEnvironment &env,
                    std::span<const SyntheticQuestion> questions,
                    std::span<const PolicyTable> policies,
                    std::uint64_t policy_version,
                    std::uint64_t salt,
                    const ReplayWeights &weights);

/// Trajectory .jsonl lines extended with `replay_score` and `policy_version`.
void write_replay_buffer(std::ostream &out, const ReplayBuffer &buffer);
void write_replay_buffer_file(const std::filesystem::path &path, const ReplayBuffer &buffer);
/// Restored entries have iteration 0; the format does not carry it.
ReplayBuffer read_replay_buffer(std::istream &in, std::size_t capacity, double priority_exponent);

}  // namespace madlab

#endif  // MADLAB_REPLAY_HPP
