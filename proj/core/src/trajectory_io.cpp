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

#include "madlab/trajectory_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace madlab
{
namespace
{

using nlohmann::json;

std::string
quoted(const std::string &s)
{
  return json(s).dump();
}

std::string
label_array(const std::vector<std::string> &labels)
{
  std::string out = "[";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i != 0) out += ',';
    out += quoted(labels[i]);
  }
  out += ']';
  return out;
}

std::vector<std::string>
string_array(const json &value, const char *field, std::size_t line_number)
{
  if (!value.is_array()) throw ParseError(fmt::format("line {}: '{}' must be an array", line_number, field));
  std::vector<std::string> out;
  for (const auto &item : value) {
    if (!item.is_string()) {
      throw ParseError(fmt::format("line {}: '{}' must contain only strings", line_number, field));
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

TrajectoryLine
parse_trajectory_line(std::string_view line, std::size_t line_number)
{
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error &e) {
    throw ParseError(fmt::format("line {}: malformed JSON: {}", line_number, e.what()));
  }
  if (!doc.is_object()) throw ParseError(fmt::format("line {}: expected a JSON object", line_number));

  for (const char *required : {"question_id", "answer_space", "rounds"}) {
    if (!doc.contains(required)) {
      throw ParseError(fmt::format("line {}: missing field '{}'", line_number, required));
    }
  }

  TrajectoryRecord record;
  if (!doc["question_id"].is_string()) {
    throw ParseError(fmt::format("line {}: 'question_id' must be a string", line_number));
  }
  record.question_id = doc["question_id"].get<std::string>();
  record.answer_space = string_array(doc["answer_space"], "answer_space", line_number);

  if (doc.contains("ground_truth") && !doc["ground_truth"].is_null()) {
    if (!doc["ground_truth"].is_string()) {
      throw ParseError(fmt::format("line {}: 'ground_truth' must be a string or null", line_number));
    }
    record.ground_truth = doc["ground_truth"].get<std::string>();
  }

  const auto &rounds = doc["rounds"];
  if (!rounds.is_array()) throw ParseError(fmt::format("line {}: 'rounds' must be an array", line_number));
  for (const auto &row : rounds) record.rounds.push_back(string_array(row, "rounds", line_number));

  TrajectoryLine out{[&] {
    try {
      return DebateTrajectory::from_record(record);
    } catch (const InvalidTrajectory &e) {
      throw ParseError(fmt::format("line {}: {}", line_number, e.what()));
    }
  }(), std::nullopt, std::nullopt};

  if (doc.contains("replay_score")) {
    if (!doc["replay_score"].is_number()) {
      throw ParseError(fmt::format("line {}: 'replay_score' must be a number", line_number));
    }
    out.replay_score = doc["replay_score"].get<double>();
  }
  if (doc.contains("policy_version")) {
    if (!doc["policy_version"].is_number_integer()) {
      throw ParseError(fmt::format("line {}: 'policy_version' must be an integer", line_number));
    }
    out.policy_version = doc["policy_version"].get<std::int64_t>();
  }
  return out;
}

std::string
format_trajectory_line(const DebateTrajectory &trajectory,
                       std::optional<double> replay_score,
                       std::optional<std::int64_t> policy_version)
{
  const auto record = trajectory.to_record();
  std::string rounds = "[";
  for (std::size_t t = 0; t < record.rounds.size(); ++t) {
    if (t != 0) rounds += ',';
    rounds += label_array(record.rounds[t]);
  }
  rounds += ']';

  auto out = fmt::format(R"({{"question_id": {}, "answer_space": {}, "ground_truth": {}, "rounds": {})",
                         quoted(record.question_id),
                         label_array(record.answer_space),
                         record.ground_truth ? quoted(*record.ground_truth) : std::string{"null"},
                         rounds);
  if (replay_score) out += fmt::format(R"(, "replay_score": {:.17g})", *replay_score);
  if (policy_version) out += fmt::format(R"(, "policy_version": {})", *policy_version);
  out += '}';
  return out;
}

std::vector<TrajectoryLine>
read_trajectory_lines(std::istream &in)
{
  std::vector<TrajectoryLine> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_trajectory_line(line, line_number));
  }
  return out;
}

std::vector<TrajectoryLine>
read_trajectory_file(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  try {
    return read_trajectory_lines(in);
  } catch (const ParseError &e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void
write_trajectories(std::ostream &out, const std::vector<DebateTrajectory> &trajectories)
{
  for (const auto &trajectory : trajectories) out << format_trajectory_line(trajectory) << '\n';
}

void
write_trajectory_file(const std::filesystem::path &path, const std::vector<DebateTrajectory> &trajectories)
{
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  write_trajectories(out, trajectories);
}

}  // namespace madlab
