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


#include <cmath>
#include <cstring>
#include <sstream>

#include <doctest.h>

#include "madlab/udpo.hpp"

using namespace madlab;

namespace
{

struct Toy {
  DebateEnvironment env;
  std::vector<SyntheticQuestion> questions;
  CoefficientSet coeffs;
};

Toy
toy(std::size_t agents = 3, std::size_t rounds = 2, std::size_t compromised = 0, double eta = 0.0)
{
  SimParams params;
  params.answer_space_size = 3;
  AgentCoefficients c;
  c.eta_anchor = eta;
  return {DebateEnvironment(params, make_agents(agents, 0.8, 0.3, compromised), rounds),
          generate_questions(12, DifficultySpec{0.3, 0.9}, 3, 7),
          CoefficientSet(agents, c)};
}

std::vector<PolicyTable>
random_tables(const Toy &t, std::uint64_t seed, double scale)
{
  std::vector<PolicyTable> tables(t.env.num_agents(), PolicyTable(t.env.num_slots()));
  RandomStream s(seed, {});
  for (auto &table : tables) {
    for (const auto &q : t.questions) {
      const auto tr = t.env.rollout(q, std::vector<PolicyTable>(t.env.num_agents(), PolicyTable(3)), 0);
      for (std::size_t i = 0; i < t.env.num_agents(); ++i) {
        if (!t.env.agents()[i].honest()) continue;
        for (const auto &ctx : t.env.agent_contexts(q, tr, i)) {
          std::vector<double> v(3);
          for (auto &x : v) x = scale * s.normal();
          table.set_logits(ctx, v);
        }
      }
    }
  }
  return tables;
}

Batch
rollout_batch(const Toy &t, std::span<const PolicyTable> policies, std::uint64_t version = 0)
{
  std::vector<BatchSample> samples;
  for (std::size_t n = 0; n < t.questions.size(); ++n) {
    samples.push_back({t.questions[n], t.env.rollout(t.questions[n], policies, n), {}, 1.0});
  }
  return make_batch(std::move(samples), t.coeffs, version);
}

}  // namespace

TEST_CASE("clipped surrogate")
{
  CHECK(clipped_surrogate(1.5, 1.0, 0.2) == doctest::Approx(1.2));
  CHECK(clipped_surrogate(1.5, -1.0, 0.2) == doctest::Approx(-1.5));
  CHECK(clipped_surrogate(1.0, 0.37, 0.2) == doctest::Approx(0.37));
  for (const double rho : {0.1, 0.7, 0.95, 1.0, 1.1, 1.9, 5.0}) {
    for (const double a : {-2.0, -0.3, 0.0, 0.4, 3.0}) CHECK(clipped_surrogate(rho, a, 0.2) <= rho * a + 1e-15);
  }
}

TEST_CASE("advantages subtract per-agent batch means")
{
  const auto est = compute_advantages({{1, 0, 1, 0}, {2, 2, 2, 2}, {0.3, 0.9, 0.1, 0.5}});
  CHECK(est.baseline[0] == doctest::Approx(0.5));
  CHECK(est.advantages[0] == std::vector<double>{0.5, -0.5, 0.5, -0.5});
  CHECK(est.advantages[1] == std::vector<double>(4, 0.0));
  CHECK(est.baseline[2] != est.baseline[0]);
  for (const auto &row : est.advantages) {
    double s = 0.0;
    for (const double a : row) s += a;
    CHECK(std::abs(s) < 1e-10);
  }
  CHECK_THROWS(compute_advantages({}));
  CHECK_THROWS(compute_advantages({{}}));
}

TEST_CASE("ratios and anchors")
{
  const auto t = toy(2, 1);
  const auto &q = t.questions[0];
  std::vector<PolicyTable> ref(2, PolicyTable(3));
  const auto tr = t.env.rollout(q, ref, 0);
  const auto ctx = t.env.agent_contexts(q, tr, 0)[0];
  CHECK(likelihood_ratio(t.env, q, 0, ref[0], ref[0], tr) == 1.0);
  CHECK(kl_anchor(t.env, q, 0, ref[0], ref[0], tr) == 0.0);

  // Raising the taken action's logit raises the ratio.
  auto cur = ref[0];
  std::vector<double> bump(3, 0.0);
  bump[t.env.frame(q).slot(tr.at(0, 0))] = 0.5;
  cur.add_to_logits(ctx, bump);
  CHECK(likelihood_ratio(t.env, q, 0, cur, ref[0], tr) > 1.0);
  CHECK(kl_anchor(t.env, q, 0, cur, ref[0], tr) > 0.0);

  // Only the first of the two visited contexts differs.
  const auto p = softmax(t.env.step_logits(q, 0, cur, ctx));
  const auto r = softmax(t.env.step_logits(q, 0, ref[0], ctx));
  double kl = 0.0;
  for (std::size_t k = 0; k < 3; ++k) kl += p[k] * std::log(p[k] / r[k]);
  CHECK(kl_anchor(t.env, q, 0, cur, ref[0], tr) == doctest::Approx(kl / 2).epsilon(1e-12));
}

TEST_CASE("near-deterministic against uniform has KL ln 2")
{
  SimParams params;
  params.answer_space_size = 2;
  params.prior_strength = 0.0;
  params.prior_noise = 0.0;
  params.stickiness = 0.0;
  params.conformity = 0.0;
  const DebateEnvironment env(params, make_agents(2, 0.5, 0.5, 0), 1);
  const auto q = generate_questions(1, DifficultySpec{}, 2, 3)[0];
  PolicyTable cur(2);
  const PolicyTable ref(2);
  const auto d = env.difficulty_bin(q);
  cur.set_logits(DebateContext{d, DebateContext::kNone, DebateContext::kNone, 0}, std::vector<double>{30.0, -30.0});
  for (std::uint8_t o = 0; o < 2; ++o) {
    for (std::uint8_t p = 0; p < 2; ++p) {
      for (std::uint8_t g = 0; g < 3; ++g) cur.set_logits(DebateContext{d, o, p, g}, std::vector<double>{30.0, -30.0});
    }
  }
  const std::vector<PolicyTable> policies{cur, ref};
  const auto tr = env.rollout(q, policies, 0);
  CHECK(kl_anchor(env, q, 0, cur, ref, tr) == doctest::Approx(std::log(2.0)).epsilon(1e-3));
}

TEST_CASE("objective vanishes at the reference")
{
  const auto t = toy(3, 2, 0, 0.5);
  const auto tables = random_tables(t, 3, 1.0);
  const auto batch = rollout_batch(t, tables);
  ClipConfig clip;
  for (const double v : objective_value(t.env, batch, tables, tables, t.coeffs, clip)) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("adversaries are excluded from the objective")
{
  const auto t = toy(3, 2, 1);
  const std::vector<PolicyTable> tables(3, PolicyTable(3));
  const auto batch = rollout_batch(t, tables);
  const auto v = objective_value(t.env, batch, tables, tables, t.coeffs, {});
  CHECK(v[2] == 0.0);
  const auto g = objective_gradient(t.env, batch, tables, tables, t.coeffs, {});
  CHECK(g[2].num_contexts() == 0);
  CHECK_THROWS_WITH(likelihood_ratio(t.env, t.questions[0], 2, tables[2], tables[2], batch.samples[0].trajectory),
                    "adversary has no likelihood");
}

TEST_CASE("analytic gradient matches central differences")
{
  for (const double eta : {0.0, 0.7}) {
    CAPTURE(eta);
    const auto t = toy(2, 1, 0, eta);
    const auto ref = random_tables(t, 11, 0.8);
    const auto cur = random_tables(t, 12, 0.8);
    const auto batch = rollout_batch(t, ref);
    ClipConfig clip;
    clip.epsilon = 1e6;
    const auto grad = objective_gradient(t.env, batch, cur, ref, t.coeffs, clip);

    const double h = 1e-5;
    std::size_t checked = 0;
    double largest = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      for (const auto &[ctx, g] : grad[i].entries()) {
        for (std::size_t k = 0; k < 3; ++k) {
          auto plus = cur;
          auto minus = cur;
          std::vector<double> d(3, 0.0);
          d[k] = h;
          plus[i].add_to_logits(ctx, d);
          d[k] = -h;
          minus[i].add_to_logits(ctx, d);
          const double fd = (objective_value(t.env, batch, plus, ref, t.coeffs, clip)[i] -
                             objective_value(t.env, batch, minus, ref, t.coeffs, clip)[i]) /
                            (2 * h);
          const double err = std::abs(fd - g[k]) / std::max(1e-6, std::abs(fd));
          CHECK(err < 1e-4);
          largest = std::max(largest, std::abs(g[k]));
          ++checked;
        }
      }
    }
    CHECK(checked > 6);
    CHECK(largest > 1e-3);
  }
}

TEST_CASE("clipped samples contribute no surrogate gradient")
{
  const auto t = toy(2, 1);
  const std::vector<PolicyTable> ref(2, PolicyTable(3));
  const auto &q = t.questions[0];
  const auto tr = t.env.rollout(q, ref, 1);
  auto cur = ref;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto ctxs = t.env.agent_contexts(q, tr, i);
    for (std::size_t r = 0; r < ctxs.size(); ++r) {
      std::vector<double> bump(3, 0.0);
      bump[t.env.frame(q).slot(tr.at(r, i))] = -4.0;
      cur[i].add_to_logits(ctxs[r], bump);
    }
  }
  CHECK(likelihood_ratio(t.env, q, 0, cur[0], ref[0], tr) < 0.8);

  Batch batch;
  batch.samples.push_back({q, tr, total_reward(tr, t.coeffs), 1.0});
  batch.advantages.baseline = {0.0, 0.0};
  batch.advantages.advantages = {{-1.0}, {1.0}};
  const auto grad = objective_gradient(t.env, batch, cur, ref, t.coeffs, {});
  double clipped = 0.0;
  double active = 0.0;
  for (const auto &[ctx, g] : grad[0].entries()) {
    for (const double v : g) clipped += std::abs(v);
  }
  for (const auto &[ctx, g] : grad[1].entries()) {
    for (const double v : g) active += std::abs(v);
  }
  CHECK(clipped == 0.0);
  CHECK(active > 0.0);
}

TEST_CASE("one ascent step on a single good trajectory raises its actions")
{
  const auto t = toy(2, 2);
  const std::vector<PolicyTable> ref(2, PolicyTable(3));
  const auto &q = t.questions[0];
  const auto tr = t.env.rollout(q, ref, 5);
  Batch batch;
  batch.samples.push_back({q, tr, total_reward(tr, t.coeffs), 1.0});
  batch.advantages.baseline = {0.0, 0.0};
  batch.advantages.advantages = {{1.0}, {1.0}};
  auto state = TrainState::initial(t.env, t.coeffs);
  ClipConfig clip;
  clip.epsilon = 1e6;
  clip.learn_rate = 0.1;
  const auto next = gradient_step(state, t.env, batch, clip);
  CHECK(next.policy_version == 1);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto ctxs = t.env.agent_contexts(q, tr, i);
    for (std::size_t r = 0; r < ctxs.size(); ++r) {
      const auto slot = t.env.frame(q).slot(tr.at(r, i));
      CHECK(next.current[i].probabilities(ctxs[r])[slot] > state.current[i].probabilities(ctxs[r])[slot]);
    }
  }
}

TEST_CASE("zero advantages at the reference leave the state unchanged")
{
  const auto t = toy(3, 1);
  auto state = TrainState::initial(t.env, t.coeffs);
  auto batch = rollout_batch(t, state.reference);
  for (auto &row : batch.advantages.advantages) std::fill(row.begin(), row.end(), 0.0);
  const auto next = gradient_step(state, t.env, batch, {});
  CHECK(next.current == state.current);
}

TEST_CASE("stale batches are rejected")
{
  const auto t = toy(2, 1);
  auto state = TrainState::initial(t.env, t.coeffs);
  const auto batch = rollout_batch(t, state.reference, 0);
  state = gradient_step(state, t.env, batch, {});
  state.refresh_reference();
  CHECK(state.reference_version == 1);
  CHECK_THROWS_WITH(gradient_step(state, t.env, batch, {}), "stale rollouts");
}

TEST_CASE("small steps ascend the objective")
{
  const auto t = toy(2, 1, 0, 0.2);
  const auto ref = random_tables(t, 31, 0.5);
  auto cur = random_tables(t, 32, 0.5);
  const auto batch = rollout_batch(t, ref);
  ClipConfig clip;
  clip.epsilon = 1e6;
  const auto grad = objective_gradient(t.env, batch, cur, ref, t.coeffs, clip);
  const double lr = 1e-4;
  auto moved = cur;
  double norm2 = 0.0;
  for (const auto &[ctx, g] : grad[0].entries()) {
    std::vector<double> step(g.begin(), g.end());
    for (auto &v : step) {
      norm2 += v * v;
      v *= lr;
    }
    moved[0].add_to_logits(ctx, step);
  }
  const double before = objective_value(t.env, batch, cur, ref, t.coeffs, clip)[0];
  const double after = objective_value(t.env, batch, moved, ref, t.coeffs, clip)[0];
  CHECK((after - before) == doctest::Approx(lr * norm2).epsilon(1e-2));
}

TEST_CASE("training is deterministic and K = 0 is the identity")
{
  const auto t = toy(3, 2);
  TrainOptions options;
  options.clip.iterations = 0;
  const auto initial = TrainState::initial(t.env, t.coeffs);
  const auto same = train(t.env, t.questions, initial, options);
  CHECK(same.current == initial.current);
  CHECK(same.history.empty());

  options.clip.iterations = 6;
  options.clip.batch_size = 8;
  options.replay = ReplaySettings{};
  options.replay->refresh_period = 2;
  ReplayBuffer b1(64);
  ReplayBuffer b2(64);
  const auto a = train(t.env, t.questions, initial, options, &b1);
  const auto b = train(t.env, t.questions, initial, options, &b2);
  CHECK(a.current == b.current);
  REQUIRE(a.history.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(format_training_metrics_row(a.history[k]) == format_training_metrics_row(b.history[k]));
    CHECK(std::memcmp(&a.history[k].mean_u_sys, &b.history[k].mean_u_sys, sizeof(double)) == 0);
  }
  CHECK(b1.size() == b2.size());
  CHECK(a.policy_version == 6);
  CHECK(a.reference_version == 6);
}

TEST_CASE("training on easy questions converges")
{
  SimParams params;
  const DebateEnvironment env(params, make_agents(3, 0.8, 0.4, 0), 2);
  const auto pool = generate_questions(200, DifficultySpec{0.0, 0.2}, 4, 17);
  TrainOptions options;
  const auto state = train(env, pool, TrainState::initial(env, CoefficientSet(3, AgentCoefficients{})), options);
  const auto held = generate_questions(200, DifficultySpec{0.0, 0.2}, 4, 18, "h");
  double acc = 0.0;
  double u = 0.0;
  for (const auto &q : held) {
    const auto tr = env.rollout(q, state.current, 99);
    acc += reward_task(tr);
    u += system_uncertainty(tr);
  }
  CHECK(acc / 200 >= 0.95);
  CHECK(u / 200 <= 0.1);
}

TEST_CASE("policy files round-trip")
{
  const auto t = toy(2, 2);
  const auto tables = random_tables(t, 41, 3.0);
  const auto space = make_answer_space(3);
  std::stringstream ss;
  write_policy(ss, tables[0], space, 0xabcdef);
  CHECK(ss.str().rfind("# madlab-policy v1\n", 0) == 0);
  CHECK(ss.str().find("# config_hash 0000000000abcdef") != std::string::npos);
  CHECK(read_policy(ss) == tables[0]);

  std::istringstream missing("d0|o-|p-|g0\t1,2,3\n");
  CHECK_THROWS_AS(read_policy(missing), ParseError);
  std::istringstream short_row("# madlab-policy v1\n# slots 3\nd0|o-|p-|g0\t1,2\n");
  CHECK_THROWS_AS(read_policy(short_row), ParseError);
}

TEST_CASE("clip settings are validated")
{
  ClipConfig c;
  c.epsilon = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.ref_refresh_period = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
