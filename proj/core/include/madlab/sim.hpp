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

#ifndef MADLAB_SIM_HPP
#define MADLAB_SIM_HPP

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "madlab/debate.hpp"
#include "madlab/rng.hpp"

namespace madlab
{

/// Simulated agents reason in a frame where slot 0 is the question's correct
/// answer and slot k is label (anchor + k) mod |Y|. Policies are tabulated in this frame
/// so that what an agent learns transfers across questions.
struct SlotFrame {
  AnswerLabel anchor;
  std::size_t size;

  [[nodiscard]] std::uint8_t slot(AnswerLabel label) const noexcept
  {
    return static_cast<std::uint8_t>((label.index + size - anchor.index) % size);
  }
  [[nodiscard]] AnswerLabel label(std::size_t slot) const noexcept
  {
    return AnswerLabel{static_cast<std::uint16_t>((anchor.index + slot) % size)};
  }
};

/// What an agent conditions on before answering in a round.
struct DebateContext {
  static constexpr std::uint8_t kNone = 0xff;

  std::uint8_t difficulty_bin{};
  std::uint8_t own_prev{kNone};   ///< slot of the agent's previous answer
  std::uint8_t peer_mode{kNone};  ///< slot of the peers' modal previous answer
  std::uint8_t agreement_bin{};   ///< 0 low, 1 mid, 2 high peer agreement

  [[nodiscard]] bool is_initial() const noexcept { return own_prev == kNone; }

  /// Text key used in policy files, e.g. `d1|o0|p2|g2` or `d0|o-|p-|g0`.
  [[nodiscard]] std::string key() const;
  static DebateContext parse_key(std::string_view key);

  constexpr auto operator<=>(const DebateContext &) const = default;
};

/// Context of `agent` before answering in `round`, given the completed rows
/// `prefix[0..round-1]`. Round 0 yields the null context for the bin.
DebateContext build_context(std::span<const std::vector<AnswerLabel>> prefix,
                            std::size_t agent,
                            std::size_t round,
                            const SlotFrame &frame,
                            std::uint8_t difficulty_bin);

/// Tabular softmax policy over slots. Unvisited contexts read as all-zero
/// logits; writes are clamped to [-kLogitClamp, kLogitClamp].
class PolicyTable
{
 public:
  static constexpr double kLogitClamp = 30.0;

  PolicyTable() = default;
  explicit PolicyTable(std::size_t num_slots);

  [[nodiscard]] std::size_t num_slots() const noexcept { return num_slots_; }
  [[nodiscard]] std::size_t num_contexts() const noexcept { return logits_.size(); }

  [[nodiscard]] std::span<const double> logits(const DebateContext &ctx) const;
  void set_logits(const DebateContext &ctx, std::span<const double> values);
  /// Adds `delta` to the context's logits, creating the entry if needed.
  void add_to_logits(const DebateContext &ctx, std::span<const double> delta);

  [[nodiscard]] std::vector<double> probabilities(const DebateContext &ctx) const;

  [[nodiscard]] const std::map<DebateContext, std::vector<double>> &entries() const noexcept { return logits_; }

  friend bool operator==(const PolicyTable &, const PolicyTable &) = default;

 private:
  std::size_t num_slots_{};
  std::map<DebateContext, std::vector<double>> logits_;
  std::vector<double> zeros_;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

/// Index drawn from softmax(logits).
std::size_t sample_index(std::span<const double> logits, RandomStream &stream);

/// Slot drawn from the table's distribution at `ctx`.
std::size_t sample_answer(const PolicyTable &policy, const DebateContext &ctx, RandomStream &stream);

enum class AgentKind { kHonest, kCompromised };

struct AgentSpec {
  AgentKind kind{AgentKind::kHonest};
  /// Honest agents: strength of the initial pull toward the correct answer.
  double skill{0.5};

  [[nodiscard]] bool honest() const noexcept { return kind == AgentKind::kHonest; }
};

enum class AdversarialTargetPolicy {
  kFixedDistractor,  ///< every compromised agent argues for slot 1
  kRandomWrong,      ///< one seeded wrong label per question, shared by all adversaries
};

std::optional<AdversarialTargetPolicy> parse_target_policy(std::string_view name);
std::string_view to_string(AdversarialTargetPolicy policy);

struct SyntheticQuestion {
  std::string id;
  std::vector<std::string> answer_space;
  AnswerLabel ground_truth;
  double difficulty{};
};

/// Closed interval the question difficulties are drawn from.
struct DifficultySpec {
  double lo{0.0};
  double hi{1.0};

  /// Accepts `mixed`, `easy`, `hard` or `lo:hi`.
  static DifficultySpec parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;
};

/// `A`, `B`, ... for the first 26 labels, `Y26`, `Y27`, ... after that.
std::vector<std::string> make_answer_space(std::size_t size);

std::vector<SyntheticQuestion> generate_questions(std::size_t count,
                                                  const DifficultySpec &difficulty,
                                                  std::size_t answer_space_size,
                                                  std::uint64_t seed,
                                                  std::string_view id_prefix = "q");

/// Behavioural constants of the simulated agents.
struct SimParams {
  std::size_t answer_space_size{4};
  std::size_t difficulty_bins{3};
  /// Logit on the correct slot for a skill-1 agent on a difficulty-0 question.
  double prior_strength{4.0};
  /// Standard deviation of the per-question, per-agent logit noise.
  double prior_noise{0.5};
  /// Logit bonus for repeating one's previous answer.
  double stickiness{0.5};
  /// Logit bonus for the peers' modal answer at full peer agreement.
  double conformity{1.5};
  AdversarialTargetPolicy target_policy{AdversarialTargetPolicy::kFixedDistractor};
  std::uint64_t seed{1};
};

/// The simulated debate: a fixed set of agents answering over T rounds.
///
/// An honest agent answers from softmax(base + table[ctx]) where `base` is
/// its untrainable disposition (question prior plus stickiness and peer
/// conformity) and `table` is the trainable PolicyTable. Compromised agents
/// repeat the adversarial target every round.
class DebateEnvironment
{
 public:
  DebateEnvironment(SimParams params, std::vector<AgentSpec> agents, std::size_t rounds);

  [[nodiscard]] const SimParams &params() const noexcept { return params_; }
  [[nodiscard]] const std::vector<AgentSpec> &agents() const noexcept { return agents_; }
  [[nodiscard]] std::size_t num_agents() const noexcept { return agents_.size(); }
  [[nodiscard]] std::size_t rounds() const noexcept { return rounds_; }
  [[nodiscard]] std::size_t num_slots() const noexcept { return params_.answer_space_size; }

  [[nodiscard]] std::uint8_t difficulty_bin(const SyntheticQuestion &question) const;
  [[nodiscard]] AnswerLabel adversarial_target(const SyntheticQuestion &question) const;

  /// Seeded private belief of an agent over labels: noise plus a
  /// skill * (1 - difficulty) bias toward the ground truth.
  [[nodiscard]] std::vector<double> prior_logits(const SyntheticQuestion &question, std::size_t agent) const;

  /// Frame anchored at the ground truth.
  [[nodiscard]] SlotFrame frame(const SyntheticQuestion &question) const;

  /// Untrainable logits of an honest agent, in its frame.
  [[nodiscard]] std::vector<double> base_logits(const SyntheticQuestion &question,
                                                std::size_t agent,
                                                const DebateContext &ctx) const;

  /// base_logits + policy.logits(ctx).
  [[nodiscard]] std::vector<double> step_logits(const SyntheticQuestion &question,
                                                std::size_t agent,
                                                const PolicyTable &policy,
                                                const DebateContext &ctx) const;

  /// Runs one debate. `policies[i]` is ignored for compromised agents.
  /// `salt` separates independent rollouts of the same question.
  [[nodiscard]] DebateTrajectory rollout(const SyntheticQuestion &question,
                                         std::span<const PolicyTable> policies,
                                         std::uint64_t salt) const;

  /// The T + 1 contexts agent i observed in `trajectory`.
  [[nodiscard]] std::vector<DebateContext> agent_contexts(const SyntheticQuestion &question,
                                                          const DebateTrajectory &trajectory,
                                                          std::size_t agent) const;

  /// Sum over rounds of log pi_i(a_t | ctx_t). Throws for compromised agents.
  [[nodiscard]] double trajectory_log_prob(const SyntheticQuestion &question,
                                           std::size_t agent,
                                           const PolicyTable &policy,
                                           const DebateTrajectory &trajectory) const;

 private:
  SimParams params_;
  std::vector<AgentSpec> agents_;
  std::size_t rounds_;
};

/// Honest agents with skills spaced evenly from `skill_max` down to
/// `skill_min`; the last `compromised` of them are replaced by adversaries.
std::vector<AgentSpec> make_agents(std::size_t num_agents, double skill_max, double skill_min, std::size_t compromised);

}  // namespace madlab

#endif  // MADLAB_SIM_HPP
