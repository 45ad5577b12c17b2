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

#include "madlab/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include <fmt/format.h>

namespace madlab
{
namespace
{

std::string
slot_text(std::uint8_t slot)
{
  return slot == DebateContext::kNone ? std::string{"-"} : std::to_string(slot);
}

std::uint8_t
parse_small(std::string_view text, std::string_view whole)
{
  if (text == "-") return DebateContext::kNone;
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value >= DebateContext::kNone) {
    throw ParseError(fmt::format("bad context key '{}'", whole));
  }
  return static_cast<std::uint8_t>(value);
}

double
parse_double(std::string_view text, std::string_view what)
{
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("cannot parse {} '{}'", what, text));
  }
  return value;
}

constexpr std::uint64_t kPriorTag = hash_string("prior");
constexpr std::uint64_t kRolloutTag = hash_string("rollout");
constexpr std::uint64_t kTargetTag = hash_string("target");
constexpr std::uint64_t kQuestionTag = hash_string("question");

}  // namespace

std::string
DebateContext::key() const
{
  return fmt::format("d{}|o{}|p{}|g{}", difficulty_bin, slot_text(own_prev), slot_text(peer_mode), agreement_bin);
}

DebateContext
DebateContext::parse_key(std::string_view key)
{
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto bar = key.find('|', start);
    parts.push_back(key.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  const char prefixes[] = {'d', 'o', 'p', 'g'};
  if (parts.size() != 4) throw ParseError(fmt::format("bad context key '{}'", key));
  for (std::size_t i = 0; i < 4; ++i) {
    if (parts[i].size() < 2 || parts[i].front() != prefixes[i]) {
      throw ParseError(fmt::format("bad context key '{}'", key));
    }
    parts[i].remove_prefix(1);
  }
  DebateContext ctx;
  ctx.difficulty_bin = parse_small(parts[0], key);
  ctx.own_prev = parse_small(parts[1], key);
  ctx.peer_mode = parse_small(parts[2], key);
  ctx.agreement_bin = parse_small(parts[3], key);
  if (ctx.difficulty_bin == kNone || ctx.agreement_bin > 2) {
    throw ParseError(fmt::format("bad context key '{}'", key));
  }
  return ctx;
}

DebateContext
build_context(std::span<const std::vector<AnswerLabel>> prefix,
              std::size_t agent,
              std::size_t round,
              const SlotFrame &frame,
              std::uint8_t difficulty_bin)
{
  DebateContext ctx;
  ctx.difficulty_bin = difficulty_bin;
  if (round == 0) return ctx;

  if (prefix.size() < round) {
    throw Error(fmt::format("context for round {} needs {} completed rounds, got {}", round, round, prefix.size()));
  }
  const auto &previous = prefix[round - 1];
  if (agent >= previous.size()) throw Error(fmt::format("incomplete round {} for agent {}", round - 1, agent));
  for (std::size_t r = 0; r < round; ++r) {
    if (prefix[r].size() != previous.size()) throw Error(fmt::format("incomplete round {}", r));
  }

  std::vector<AnswerLabel> peers;
  peers.reserve(previous.size() - 1);
  for (std::size_t j = 0; j < previous.size(); ++j) {
    if (j != agent) peers.push_back(previous[j]);
  }
  ctx.own_prev = frame.slot(previous[agent]);
  if (peers.empty()) return ctx;

  const auto vote = majority_vote(peers);
  const auto agreeing = vote.counts.at(vote.winner);
  ctx.peer_mode = frame.slot(vote.winner);
  ctx.agreement_bin = static_cast<std::uint8_t>(std::min<std::size_t>(2, 3 * agreeing / peers.size()));
  return ctx;
}

PolicyTable::PolicyTable(std::size_t num_slots) : num_slots_{num_slots}, zeros_(num_slots, 0.0)
{
  if (num_slots < 2) throw Error("policy needs at least 2 answer slots");
}

std::span<const double>
PolicyTable::logits(const DebateContext &ctx) const
{
  const auto it = logits_.find(ctx);
  return it == logits_.end() ? std::span<const double>(zeros_) : std::span<const double>(it->second);
}

void
PolicyTable::set_logits(const DebateContext &ctx, std::span<const double> values)
{
  if (values.size() != num_slots_) throw Error("logit vector has the wrong length");
  auto &entry = logits_[ctx];
  entry.assign(values.begin(), values.end());
  for (auto &v : entry) {
    if (!std::isfinite(v)) throw Error("non-finite logit");
    v = std::clamp(v, -kLogitClamp, kLogitClamp);
  }
}

void
PolicyTable::add_to_logits(const DebateContext &ctx, std::span<const double> delta)
{
  if (delta.size() != num_slots_) throw Error("logit delta has the wrong length");
  auto [it, inserted] = logits_.try_emplace(ctx, zeros_);
  for (std::size_t k = 0; k < num_slots_; ++k) {
    it->second[k] = std::clamp(it->second[k] + delta[k], -kLogitClamp, kLogitClamp);
  }
}

std::vector<double>
PolicyTable::probabilities(const DebateContext &ctx) const
{
  return softmax(logits(ctx));
}

std::vector<double>
softmax(std::span<const double> logits)
{
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - top);
    total += p[k];
  }
  for (auto &v : p) v /= total;
  return p;
}

std::size_t
sample_index(std::span<const double> logits, RandomStream &stream)
{
  const auto p = softmax(logits);
  const double u = stream.uniform();
  double cumulative = 0.0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    cumulative += p[k];
    if (u < cumulative) return k;
  }
  return p.size() - 1;
}

std::size_t
sample_answer(const PolicyTable &policy, const DebateContext &ctx, RandomStream &stream)
{
  return sample_index(policy.logits(ctx), stream);
}

std::optional<AdversarialTargetPolicy>
parse_target_policy(std::string_view name)
{
  if (name == "fixed_distractor") return AdversarialTargetPolicy::kFixedDistractor;
  if (name == "random_wrong") return AdversarialTargetPolicy::kRandomWrong;
  return std::nullopt;
}

std::string_view
to_string(AdversarialTargetPolicy policy)
{
  switch (policy) {
    case AdversarialTargetPolicy::kFixedDistractor:
      return "fixed_distractor";
    case AdversarialTargetPolicy::kRandomWrong:
      return "random_wrong";
  }
  return "unknown";
}

DifficultySpec
DifficultySpec::parse(std::string_view text)
{
  if (text == "mixed") return {0.0, 1.0};
  if (text == "easy") return {0.0, 0.2};
  if (text == "hard") return {0.8, 1.0};
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError(fmt::format("difficulty must be mixed, easy, hard or lo:hi, got '{}'", text));
  }
  DifficultySpec spec{parse_double(text.substr(0, colon), "difficulty"),
                      parse_double(text.substr(colon + 1), "difficulty")};
  if (!(spec.lo >= 0.0 && spec.lo <= spec.hi && spec.hi <= 1.0)) {
    throw ConfigError(fmt::format("difficulty range '{}' must satisfy 0 <= lo <= hi <= 1", text));
  }
  return spec;
}

std::string
DifficultySpec::to_string() const
{
  return fmt::format("{}:{}", lo, hi);
}

std::vector<std::string>
make_answer_space(std::size_t size)
{
  std::vector<std::string> out;
  out.reserve(size);
  for (std::size_t k = 0; k < size; ++k) {
    out.push_back(k < 26 ? std::string(1, static_cast<char>('A' + k)) : fmt::format("Y{}", k));
  }
  return out;
}

std::vector<SyntheticQuestion>
generate_questions(std::size_t count,
                   const DifficultySpec &difficulty,
                   std::size_t answer_space_size,
                   std::uint64_t seed,
                   std::string_view id_prefix)
{
  if (count < 1) throw Error("need at least one question");
  if (answer_space_size < 2) throw Error("answer space needs at least 2 labels");

  const auto space = make_answer_space(answer_space_size);
  const auto width = std::to_string(count - 1).size();
  std::vector<SyntheticQuestion> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    RandomStream stream(seed, {kQuestionTag, hash_string(id_prefix), n});
    SyntheticQuestion q;
    q.id = fmt::format("{}{:0{}}", id_prefix, n, width);
    q.answer_space = space;
    q.ground_truth = AnswerLabel{static_cast<std::uint16_t>(stream.below(answer_space_size))};
    q.difficulty = difficulty.lo + (difficulty.hi - difficulty.lo) * stream.uniform();
    out.push_back(std::move(q));
  }
  return out;
}

DebateEnvironment::DebateEnvironment(SimParams params, std::vector<AgentSpec> agents, std::size_t rounds)
    : params_{params}, agents_{std::move(agents)}, rounds_{rounds}
{
  if (agents_.size() < 2) throw Error("a debate needs at least 2 agents");
  if (rounds_ < 1) throw Error("a debate needs at least 1 round");
  if (params_.answer_space_size < 2) throw Error("answer space needs at least 2 labels");
  if (params_.answer_space_size >= DebateContext::kNone) throw Error("answer space too large");
  if (params_.difficulty_bins < 1 || params_.difficulty_bins >= DebateContext::kNone) {
    throw Error("difficulty_bins must be in [1, 254]");
  }
}

std::uint8_t
DebateEnvironment::difficulty_bin(const SyntheticQuestion &question) const
{
  const auto bins = params_.difficulty_bins;
  const auto bin = static_cast<std::size_t>(question.difficulty * static_cast<double>(bins));
  return static_cast<std::uint8_t>(std::min(bin, bins - 1));
}

AnswerLabel
DebateEnvironment::adversarial_target(const SyntheticQuestion &question) const
{
  const auto frame = this->frame(question);
  if (params_.target_policy == AdversarialTargetPolicy::kFixedDistractor) return frame.label(1);
  RandomStream stream(params_.seed, {kTargetTag, hash_string(question.id)});
  return frame.label(1 + stream.below(frame.size - 1));
}

std::vector<double>
DebateEnvironment::prior_logits(const SyntheticQuestion &question, std::size_t agent) const
{
  const auto &spec = agents_.at(agent);
  std::vector<double> out(num_slots(), 0.0);
  RandomStream noise(params_.seed, {kPriorTag, hash_string(question.id), agent});
  for (auto &v : out) v = params_.prior_noise * noise.normal();
  out.at(question.ground_truth.index) += params_.prior_strength * spec.skill * (1.0 - question.difficulty);
  return out;
}

SlotFrame
DebateEnvironment::frame(const SyntheticQuestion &question) const
{
  return {question.ground_truth, num_slots()};
}

std::vector<double>
DebateEnvironment::base_logits(const SyntheticQuestion &question, std::size_t agent, const DebateContext &ctx) const
{
  const auto prior = prior_logits(question, agent);
  const auto frame = this->frame(question);
  std::vector<double> out(num_slots());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = prior[frame.label(k).index];

  if (!ctx.is_initial()) {
    out.at(ctx.own_prev) += params_.stickiness;
    if (ctx.peer_mode != DebateContext::kNone) {
      out.at(ctx.peer_mode) += params_.conformity * static_cast<double>(ctx.agreement_bin + 1) / 3.0;
    }
  }
  return out;
}

std::vector<double>
DebateEnvironment::step_logits(const SyntheticQuestion &question,
                               std::size_t agent,
                               const PolicyTable &policy,
                               const DebateContext &ctx) const
{
  auto out = base_logits(question, agent, ctx);
  const auto table = policy.logits(ctx);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += table[k];
  return out;
}

DebateTrajectory
DebateEnvironment::rollout(const SyntheticQuestion &question,
                           std::span<const PolicyTable> policies,
                           std::uint64_t salt) const
{
  if (policies.size() != agents_.size()) throw Error("one policy per agent is required");
  if (question.answer_space.size() != num_slots()) throw Error("question answer space does not match environment");

  const auto frame = this->frame(question);
  const auto bin = difficulty_bin(question);
  const auto target = adversarial_target(question);
  const auto qhash = hash_string(question.id);

  std::vector<std::vector<AnswerLabel>> grid;
  grid.reserve(rounds_ + 1);
  for (std::size_t t = 0; t <= rounds_; ++t) {
    std::vector<AnswerLabel> row(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      if (!agents_[i].honest()) {
        row[i] = target;
        continue;
      }
      const auto ctx = build_context(grid, i, t, frame, bin);
      RandomStream stream(params_.seed, {kRolloutTag, qhash, salt, t, i});
      row[i] = frame.label(sample_index(step_logits(question, i, policies[i], ctx), stream));
    }
    grid.push_back(std::move(row));
  }
  return DebateTrajectory(question.id, question.answer_space, std::move(grid), question.ground_truth);
}

std::vector<DebateContext>
DebateEnvironment::agent_contexts(const SyntheticQuestion &question,
                                  const DebateTrajectory &trajectory,
                                  std::size_t agent) const
{
  const auto frame = this->frame(question);
  const auto bin = difficulty_bin(question);
  std::vector<std::vector<AnswerLabel>> grid;
  std::vector<DebateContext> out;
  out.reserve(trajectory.rounds() + 1);
  for (std::size_t t = 0; t <= trajectory.rounds(); ++t) {
    out.push_back(build_context(grid, agent, t, frame, bin));
    const auto row = trajectory.round(t);
    grid.emplace_back(row.begin(), row.end());
  }
  return out;
}

double
DebateEnvironment::trajectory_log_prob(const SyntheticQuestion &question,
                                       std::size_t agent,
                                       const PolicyTable &policy,
                                       const DebateTrajectory &trajectory) const
{
  if (!agents_.at(agent).honest()) throw Error("adversary has no likelihood");
  const auto frame = this->frame(question);
  const auto contexts = agent_contexts(question, trajectory, agent);
  double total = 0.0;
  for (std::size_t t = 0; t < contexts.size(); ++t) {
    const auto logits = step_logits(question, agent, policy, contexts[t]);
    const double top = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (const double v : logits) z += std::exp(v - top);
    total += logits[frame.slot(trajectory.at(t, agent))] - top - std::log(z);
  }
  return total;
}

std::vector<AgentSpec>
make_agents(std::size_t num_agents, double skill_max, double skill_min, std::size_t compromised)
{
  if (compromised > num_agents) throw Error("more compromised agents than agents");
  std::vector<AgentSpec> out(num_agents);
  for (std::size_t i = 0; i < num_agents; ++i) {
    const double frac = num_agents > 1 ? static_cast<double>(i) / static_cast<double>(num_agents - 1) : 0.0;
    out[i].skill = skill_max + (skill_min - skill_max) * frac;
    if (i >= num_agents - compromised) out[i].kind = AgentKind::kCompromised;
  }
  return out;
}

}  // namespace madlab
