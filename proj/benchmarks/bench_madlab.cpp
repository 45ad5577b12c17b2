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


#include <benchmark/benchmark.h>

#include "madlab/metrics.hpp"
#include "madlab/replay.hpp"
#include "madlab/sim.hpp"
#include "madlab/udpo.hpp"

namespace
{

using namespace madlab;

DebateEnvironment
environment(std::size_t agents, std::size_t rounds)
{
  return DebateEnvironment(SimParams{}, make_agents(agents, 0.9, 0.3, 0), rounds);
}

void
BM_FullProfile(benchmark::State &state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto env = environment(n, 5);
  const std::vector<PolicyTable> policies(n, PolicyTable(4));
  const auto q = generate_questions(1, DifficultySpec{}, 4, 1)[0];
  const auto t = env.rollout(q, policies, 0);
  for (auto _ : state) benchmark::DoNotOptimize(full_profile(t, MetricConfig{}));
}
BENCHMARK(BM_FullProfile)->Arg(3)->Arg(5)->Arg(10);

void
BM_Rollout(benchmark::State &state)
{
  const auto rounds = static_cast<std::size_t>(state.range(0));
  const auto env = environment(5, rounds);
  const std::vector<PolicyTable> policies(5, PolicyTable(4));
  const auto qs = generate_questions(64, DifficultySpec{}, 4, 1);
  std::uint64_t salt = 0;
  for (auto _ : state) {
    for (const auto &q : qs) benchmark::DoNotOptimize(env.rollout(q, policies, salt));
    ++salt;
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(qs.size()));
}
BENCHMARK(BM_Rollout)->Arg(3)->Arg(5)->Arg(10);

void
BM_ObjectiveGradient(benchmark::State &state)
{
  const auto env = environment(5, 5);
  const std::vector<PolicyTable> policies(5, PolicyTable(4));
  const auto qs = generate_questions(static_cast<std::size_t>(state.range(0)), DifficultySpec{}, 4, 2);
  std::vector<BatchSample> samples;
  for (std::size_t n = 0; n < qs.size(); ++n) samples.push_back({qs[n], env.rollout(qs[n], policies, n), {}, 1.0});
  const CoefficientSet coeffs(5, AgentCoefficients{});
  const auto batch = make_batch(std::move(samples), coeffs, 0);
  for (auto _ : state) benchmark::DoNotOptimize(objective_gradient(env, batch, policies, policies, coeffs, {}));
}
BENCHMARK(BM_ObjectiveGradient)->Arg(32)->Arg(128);

void
BM_ReplaySample(benchmark::State &state)
{
  const auto env = environment(5, 5);
  const std::vector<PolicyTable> policies(5, PolicyTable(4));
  ReplayBuffer buffer(1024);
  for (const auto &q : generate_questions(1024, DifficultySpec{}, 4, 3)) {
    auto t = env.rollout(q, policies, 0);
    const double score = replay_score(t, {});
    buffer.push({std::move(t), score, 0, 0});
  }
  RandomStream stream(1, {});
  for (auto _ : state) benchmark::DoNotOptimize(replay_sample(buffer, static_cast<std::size_t>(state.range(0)), stream));
}
BENCHMARK(BM_ReplaySample)->Arg(8)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
