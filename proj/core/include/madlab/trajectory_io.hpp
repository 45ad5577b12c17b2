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

#ifndef MADLAB_TRAJECTORY_IO_HPP
#define MADLAB_TRAJECTORY_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "madlab/debate.hpp"

namespace madlab
{

/// One line of a trajectory .jsonl file.
///
/// `replay_score` and `policy_version` are only present in replay-buffer
/// dumps; plain trajectory files leave them empty.
struct TrajectoryLine {
  DebateTrajectory trajectory;
  std::optional<double> replay_score;
  std::optional<std::int64_t> policy_version;
};

/// Parses one JSON object; errors are reported against `line_number`.
TrajectoryLine parse_trajectory_line(std::string_view line, std::size_t line_number);

/// Serializes without a trailing newline.
std::string format_trajectory_line(const DebateTrajectory &trajectory,
                                   std::optional<double> replay_score = std::nullopt,
                                   std::optional<std::int64_t> policy_version = std::nullopt);

/// Reads every non-blank line. Throws ParseError naming the first bad line.
std::vector<TrajectoryLine> read_trajectory_lines(std::istream &in);
std::vector<TrajectoryLine> read_trajectory_file(const std::filesystem::path &path);

void write_trajectories(std::ostream &out, const std::vector<DebateTrajectory> &trajectories);
void write_trajectory_file(const std::filesystem::path &path, const std::vector<DebateTrajectory> &trajectories);

}  // namespace madlab

#endif  // MADLAB_TRAJECTORY_IO_HPP
