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

#include "madlab/udpo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <utility>

#include <fmt/format.h>

namespace madlab
{
namespace
{

constexpr std::uint64_t kMinibatchTag = hash_string("minibatch");
constexpr std::uint64_t kTrainTag = hash_string("train");
constexpr std::uint64_t kReplayTag = hash_string("replay");
constexpr std::uint64_t kReplayDrawTag = hash_string("replay-draw");
constexpr std::uint64_t kRefreshTag = hash_string("replay-refresh");

std::vector<double>
log_softmax(std::span<const double> logits)
{
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (const double v : logits) z += std::exp(v - top);
  const double log_z = top + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] = logits[k] - log_z;
  return out;
}

/// Everything the objective needs about one agent on one trajectory.
struct AgentSteps {
  std::vector<DebateContext> contexts;
  std::vector<std::vector<double>> log_cur;
  std::vector<std::vector<double>> log_ref;
  std::vector<std::size_t> actions;
  double log_prob_cur{};
  double log_prob_ref{};
};

AgentSteps
agent_steps(const DebateEnvironment &env,
            const SyntheticQuestion &question,
            std::size_t agent,
            const PolicyTable &current,
            const PolicyTable &reference,
            const DebateTrajectory &trajectory)
{
  if (!env.agents().at(agent).honest()) throw Error("adversary has no likelihood");
  const auto frame = env.frame(question);
  AgentSteps s;
  s.contexts = env.agent_contexts(question, trajectory, agent);
  for (std::size_t t = 0; t < s.contexts.size(); ++t) {
    const auto base = env.base_logits(question, agent, s.contexts[t]);
    auto cur = base;
    auto ref = base;
    const auto cur_table = current.logits(s.contexts[t]);
    const auto ref_table = reference.logits(s.contexts[t]);
    for (std::size_t k = 0; k < base.size(); ++k) {
      cur[k] += cur_table[k];
      ref[k] += ref_table[k];
    }
    const auto action = frame.slot(trajectory.at(t, agent));
    s.log_cur.push_back(log_softmax(cur));
    s.log_ref.push_back(log_softmax(ref));
    s.actions.push_back(action);
    s.log_prob_cur += s.log_cur.back()[action];
    s.log_prob_ref += s.log_ref.back()[action];
  }
  return s;
}

double
context_kl(std::span<const double> log_p, std::span<const double> log_q)
{
  double kl = 0.0;
  for (std::size_t k = 0; k < log_p.size(); ++k) kl += std::exp(log_p[k]) * (log_p[k] - log_q[k]);
  return std::max(kl, 0.0);
}

double
mean_kl(const AgentSteps &s)
{
  double total = 0.0;
  for (std::size_t t = 0; t < s.contexts.size(); ++t) total += context_kl(s.log_cur[t], s.log_ref[t]);
  return total / static_cast<double>(s.contexts.size());
}

void
check_batch_shape(const DebateEnvironment &env,
                  const Batch &batch,
                  std::span<const PolicyTable> current,
                  std::span<const PolicyTable> reference,
                  const CoefficientSet &coeffs)
{
  const auto n = env.num_agents();
  if (current.size() != n || reference.size() != n || coeffs.size() != n) {
    throw Error("policies and coefficients must cover every agent");
  }
  if (batch.advantages.advantages.size() != n) throw Error("batch advantages do not cover every agent");
  for (const auto &row : batch.advantages.advantages) {
    if (row.size() != batch.samples.size()) throw Error("batch advantages do not cover every sample");
  }
}

std::string
format_logits(std::span<const double> logits)
{
  std::string out;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (k != 0) out += ',';
    out += fmt::format("{:.17g}", logits[k]);
  }
  return out;
}

}  // namespace

void
ClipConfig::validate() const
{
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("udpo.epsilon must be finite and > 0");
  if (!(learn_rate > 0.0) || !std::isfinite(learn_rate)) throw ConfigError("udpo.learn_rate must be finite and > 0");
  if (batch_size == 0) throw ConfigError("udpo.batch_size must be positive");
  if (ref_refresh_period == 0) throw ConfigError("udpo.ref_refresh_period must be positive");
}

AdvantageEstimate
compute_advantages(const std::vector<std::vector<double>> &rewards)
{
  AdvantageEstimate est;
  for (const auto &agent_rewards : rewards) {
    if (agent_rewards.empty()) throw Error("empty batch");
    const double b = std::accumulate(agent_rewards.begin(), agent_rewards.end(), 0.0) /
                     static_cast<double>(agent_rewards.size());
    est.baseline.push_back(b);
    auto &adv = est.advantages.emplace_back();
    adv.reserve(agent_rewards.size());
    for (const double r : agent_rewards) adv.push_back(r - b);
  }
  if (rewards.empty()) throw Error("empty batch");
  return est;
}

double
likelihood_ratio(const DebateEnvironment &env,
                 const SyntheticQuestion &question,
                 std::size_t agent,
                 const PolicyTable &current,
                 const PolicyTable &reference,
                 const DebateTrajectory &trajectory)
{
  const auto s = agent_steps(env, question, agent, current, reference, trajectory);
  return std::exp(s.log_prob_cur - s.log_prob_ref);
}

double
clipped_surrogate(double rho, double advantage, double epsilon)
{
  const double clipped = std::clamp(rho, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(rho * advantage, clipped * advantage);
}

double
kl_anchor(const DebateEnvironment &env,
          const SyntheticQuestion &question,
          std::size_t agent,
          const PolicyTable &current,
          const PolicyTable &reference,
          const DebateTrajectory &trajectory)
{
  return mean_kl(agent_steps(env, question, agent, current, reference, trajectory));
}

Batch
make_batch(std::vector<BatchSample> samples, const CoefficientSet &coeffs, std::uint64_t reference_version)
{
  if (samples.empty()) throw Error("empty batch");
  std::vector<std::vector<double>> rewards(coeffs.size());
  for (auto &s : samples) {
    s.rewards = total_reward(s.trajectory, coeffs);
    for (std::size_t i = 0; i < coeffs.size(); ++i) rewards[i].push_back(s.rewards.total[i]);
  }
  Batch batch;
  batch.advantages = compute_advantages(rewards);
  batch.samples = std::move(samples);
  batch.reference_version = reference_version;
  return batch;
}

std::vector<double>
objective_value(const DebateEnvironment &env,
                const Batch &batch,
                std::span<const PolicyTable> current,
                std::span<const PolicyTable> reference,
                const CoefficientSet &coeffs,
                const ClipConfig &clip)
{
  check_batch_shape(env, batch, current, reference, coeffs);
  const auto m = static_cast<double>(batch.samples.size());
  std::vector<double> out(env.num_agents(), 0.0);
  for (std::size_t i = 0; i < env.num_agents(); ++i) {
    if (!env.agents()[i].honest()) continue;
    double surrogate = 0.0;
    double anchor = 0.0;
    for (std::size_t n = 0; n < batch.samples.size(); ++n) {
      const auto &sample = batch.samples[n];
      const auto s = agent_steps(env, sample.question, i, current[i], reference[i], sample.trajectory);
      const double rho = std::exp(s.log_prob_cur - s.log_prob_ref);
      surrogate += sample.weight * clipped_surrogate(rho, batch.advantages.advantages[i][n], clip.epsilon);
      anchor += sample.weight * mean_kl(s);
    }
    out[i] = surrogate / m - coeffs[i].eta_anchor * anchor / m;
  }
  return out;
}

std::vector<PolicyTable>
objective_gradient(const DebateEnvironment &env,
                   const Batch &batch,
                   std::span<const PolicyTable> current,
                   std::span<const PolicyTable> reference,
                   const CoefficientSet &coeffs,
                   const ClipConfig &clip)
{
  check_batch_shape(env, batch, current, reference, coeffs);
  const auto slots = env.num_slots();
  const auto m = static_cast<double>(batch.samples.size());
  std::vector<PolicyTable> grads(env.num_agents(), PolicyTable(slots));
  std::vector<double> delta(slots);

  for (std::size_t i = 0; i < env.num_agents(); ++i) {
    if (!env.agents()[i].honest()) continue;
    // Accumulate unclamped, then copy into the table.
    std::map<DebateContext, std::vector<double>> acc;
    for (std::size_t n = 0; n < batch.samples.size(); ++n) {
      const auto &sample = batch.samples[n];
      const auto s = agent_steps(env, sample.question, i, current[i], reference[i], sample.trajectory);
      const double rho = std::exp(s.log_prob_cur - s.log_prob_ref);
      const double adv = batch.advantages.advantages[i][n];
      const bool clipped = (adv > 0.0 && rho > 1.0 + clip.epsilon) || (adv < 0.0 && rho < 1.0 - clip.epsilon);
      const double surrogate_scale = clipped ? 0.0 : sample.weight * adv * rho / m;
      const double anchor_scale =
          coeffs[i].eta_anchor * sample.weight / (m * static_cast<double>(s.contexts.size()));

      for (std::size_t t = 0; t < s.contexts.size(); ++t) {
        auto &g = acc.try_emplace(s.contexts[t], slots, 0.0).first->second;
        const auto &log_p = s.log_cur[t];
        const auto &log_q = s.log_ref[t];
        const double kl = context_kl(log_p, log_q);
        for (std::size_t k = 0; k < slots; ++k) {
          const double p = std::exp(log_p[k]);
          g[k] += surrogate_scale * ((k == s.actions[t] ? 1.0 : 0.0) - p);
          g[k] -= anchor_scale * p * ((log_p[k] - log_q[k]) - kl);
        }
      }
    }
    for (const auto &[ctx, g] : acc) {
      std::copy(g.begin(), g.end(), delta.begin());
      grads[i].add_to_logits(ctx, delta);
    }
  }
  return grads;
}

TrainState
TrainState::initial(const DebateEnvironment &env, CoefficientSet coeffs)
{
  if (coeffs.size() != env.num_agents()) throw Error("one coefficient entry per agent is required");
  TrainState state;
  state.current.assign(env.num_agents(), PolicyTable(env.num_slots()));
  state.reference = state.current;
  state.coeffs = std::move(coeffs);
  return state;
}

void
TrainState::refresh_reference()
{
  reference = current;
  reference_version = policy_version;
}

TrainState
gradient_step(TrainState state, const DebateEnvironment &env, const Batch &batch, const ClipConfig &clip)
{
  clip.validate();
  if (batch.reference_version != state.reference_version) throw Error("stale rollouts");

  const auto grads = objective_gradient(env, batch, state.current, state.reference, state.coeffs, clip);
  std::vector<double> step(env.num_slots());
  for (std::size_t i = 0; i < env.num_agents(); ++i) {
    if (!env.agents()[i].honest()) continue;
    for (const auto &[ctx, g] : grads[i].entries()) {
      bool any = false;
      for (std::size_t k = 0; k < g.size(); ++k) {
        step[k] = clip.learn_rate * g[k];
        any = any || step[k] != 0.0;
      }
      if (any) state.current[i].add_to_logits(ctx, step);
    }
  }
  ++state.policy_version;
  return state;
}

TrainState
train(const DebateEnvironment &env,
      std::span<const SyntheticQuestion> pool,
      TrainState state,
      const TrainOptions &options,
      ReplayBuffer *buffer)
{
  const auto &clip = options.clip;
  clip.validate();
  options.metric.validate();
  if (clip.iterations == 0) return state;
  if (pool.empty()) throw Error("training pool is empty");

  const bool replay = buffer != nullptr && options.replay.has_value();
  std::map<std::string, const SyntheticQuestion *> by_id;
  for (const auto &q : pool) by_id.emplace(q.id, &q);

  const auto replay_quota = replay ? static_cast<std::size_t>(std::lround(
                                         options.replay->fraction * static_cast<double>(clip.batch_size)))
                                   : 0;
  std::vector<std::size_t> order(pool.size());

  for (std::size_t k = 0; k < clip.iterations; ++k) {
    const auto replay_count = replay && !buffer->empty() ? std::min(replay_quota, clip.batch_size - 1) : 0;
    const auto fresh_count = std::min(clip.batch_size - replay_count, pool.size());

    // Partial Fisher-Yates: a fresh minibatch without replacement.
    std::iota(order.begin(), order.end(), 0);
    RandomStream pick(options.seed, {kMinibatchTag, k});
    for (std::size_t n = 0; n < fresh_count; ++n) {
      std::swap(order[n], order[n + pick.below(pool.size() - n)]);
    }

    std::vector<BatchSample> samples;
    samples.reserve(fresh_count + replay_count);
    for (std::size_t n = 0; n < fresh_count; ++n) {
      const auto &q = pool[order[n]];
      samples.push_back({q, env.rollout(q, state.reference, combine_key(kTrainTag, k)), {}, 1.0});
    }

    std::vector<ReplayDraw> draws;
    if (replay_count > 0) {
      RandomStream stream(options.seed, {kReplayDrawTag, k});
      draws = replay_sample(*buffer, replay_count, stream);
      for (std::size_t n = 0; n < draws.size(); ++n) {
        const auto &stored = (*buffer)[draws[n].index];
        const auto it = by_id.find(stored.trajectory.question_id());
        if (it == by_id.end()) throw Error(fmt::format("replayed question '{}' not in pool", stored.trajectory.question_id()));
        // Stored rollouts predate the reference; replay re-runs the question under it.
        samples.push_back({*it->second,
                           env.rollout(*it->second, state.reference, combine_key(combine_key(kReplayTag, k), n)),
                           {},
                           draws[n].weight});
      }
    }

    const auto batch = make_batch(std::move(samples), state.coeffs, state.reference_version);

    IterationMetrics metrics;
    metrics.iteration = k;
    std::size_t honest = 0;
    for (const auto &a : env.agents()) honest += a.honest() ? 1 : 0;
    for (std::size_t n = 0; n < fresh_count; ++n) {
      const auto &s = batch.samples[n];
      const auto profile = full_profile(s.trajectory, options.metric);
      metrics.accuracy += s.rewards.r_task;
      metrics.mean_u_intra += profile.u_intra;
      metrics.mean_u_inter += profile.u_inter;
      metrics.mean_u_sys += profile.u_sys;
      double reward_sum = 0.0;
      for (std::size_t i = 0; i < env.num_agents(); ++i) {
        if (env.agents()[i].honest()) reward_sum += s.rewards.total[i];
      }
      metrics.mean_total_reward += honest > 0 ? reward_sum / static_cast<double>(honest) : 0.0;
    }
    const auto denom = static_cast<double>(fresh_count);
    metrics.accuracy /= denom;
    metrics.mean_u_intra /= denom;
    metrics.mean_u_inter /= denom;
    metrics.mean_u_sys /= denom;
    metrics.mean_total_reward /= denom;

    const auto generating_version = state.reference_version;
    state = gradient_step(std::move(state), env, batch, clip);
    state.history.push_back(metrics);
    ++state.iteration;

    if (replay) {
      for (std::size_t n = 0; n < draws.size(); ++n) {
        const auto &s = batch.samples[fresh_count + n];
        buffer->replace(draws[n].index,
                        {s.trajectory, replay_score(s.trajectory, options.replay->weights), k, generating_version});
      }
      for (std::size_t n = 0; n < fresh_count; ++n) {
        const auto &s = batch.samples[n];
        buffer->push({s.trajectory, replay_score(s.trajectory, options.replay->weights), k, generating_version});
      }
    }

    if ((k + 1) % clip.ref_refresh_period == 0) state.refresh_reference();
    if (replay && options.replay->refresh_period > 0 && (k + 1) % options.replay->refresh_period == 0) {
      buffer_refresh(*buffer, env, pool, state.reference, state.reference_version,
                     combine_key(combine_key(options.seed, kRefreshTag), k), options.replay->weights);
    }
  }
  return state;
}

std::string
training_metrics_header()
{
  return "iter,accuracy,mean_U_intra,mean_U_inter,mean_U_sys,mean_total_reward";
}

std::string
format_training_metrics_row(const IterationMetrics &m)
{
  return fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}",
                     m.iteration, m.accuracy, m.mean_u_intra, m.mean_u_inter, m.mean_u_sys, m.mean_total_reward);
}

void
write_policy(std::ostream &out,
             const PolicyTable &policy,
             std::span<const std::string> answer_space,
             std::uint64_t config_hash)
{
  std::string labels;
  for (std::size_t k = 0; k < answer_space.size(); ++k) {
    if (k != 0) labels += ',';
    labels += answer_space[k];
  }
  out << "# madlab-policy v1\n";
  out << "# answer_space " << labels << '\n';
  out << "# slots " << policy.num_slots() << '\n';
  out << "# frame truth-relative\n";
  out << fmt::format("# config_hash {:016x}\n", config_hash);
  for (const auto &[ctx, logits] : policy.entries()) out << ctx.key() << '\t' << format_logits(logits) << '\n';
}

void
write_policy_file(const std::filesystem::path &path,
                  const PolicyTable &policy,
                  std::span<const std::string> answer_space,
                  std::uint64_t config_hash)
{
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  write_policy(out, policy, answer_space, config_hash);
}

PolicyTable
read_policy(std::istream &in)
{
  std::string line;
  std::size_t line_number = 0;
  std::optional<PolicyTable> table;
  bool saw_magic = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line == "# madlab-policy v1") saw_magic = true;
      if (line.rfind("# slots ", 0) == 0) table.emplace(std::stoul(line.substr(8)));
      continue;
    }
    if (!saw_magic || !table) throw ParseError(fmt::format("line {}: policy header missing", line_number));
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(fmt::format("line {}: expected key<TAB>logits", line_number));
    const auto ctx = DebateContext::parse_key(std::string_view(line).substr(0, tab));
    std::vector<double> logits;
    std::string_view rest = std::string_view(line).substr(tab + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto field = rest.substr(0, comma);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError(fmt::format("line {}: bad logit '{}'", line_number, field));
      }
      logits.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (logits.size() != table->num_slots()) {
      throw ParseError(fmt::format("line {}: expected {} logits", line_number, table->num_slots()));
    }
    table->set_logits(ctx, logits);
  }
  if (!table) throw ParseError("policy header missing");
  return *std::move(table);
}

}  // namespace madlab
