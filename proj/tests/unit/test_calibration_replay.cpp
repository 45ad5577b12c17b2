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
#include <set>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

#include "madlab/calibration.hpp"
#include "madlab/replay.hpp"
#include "madlab/trajectory_io.hpp"
#include "oracles.hpp"

using namespace madlab;

namespace
{

ReplayEntry
entry(double score, std::string id = "q")
{
  return {oracle::make({{0, 0}, {0, 0}}, 2, std::move(id), 0), score, 0, 0};
}

}  // namespace

TEST_CASE("calibrated coefficients")
{
  CalibrationConfig cfg;
  AgentUncertaintyProfile profile{{0.2, 0.5, 0.25, 0.4}};
  const auto c = calibrate_coefficients(profile, cfg)[0];
  CHECK(c.alpha == doctest::Approx(1.3));
  CHECK(c.beta == doctest::Approx(1.75));
  CHECK(c.gamma == doctest::Approx(1.375));
  CHECK(c.lambda_task == doctest::Approx(0.625));
  CHECK(c.eta_anchor == doctest::Approx(0.016));

  cfg.kappa = 0.0;
  const auto flat = calibrate_coefficients(profile, cfg)[0];
  CHECK(flat.alpha == 1.0);
  CHECK(flat.lambda_task == 1.0);
  CHECK(flat.eta_anchor == 0.01);
}

TEST_CASE("coefficients move monotonically with uncertainty")
{
  const CalibrationConfig cfg;
  double last_alpha = 0, last_beta = 0, last_gamma = 0, last_eta = 0, last_lambda = 2;
  for (int s = 0; s <= 10; ++s) {
    const double u = s / 10.0;
    const auto c = calibrate_coefficients({{u, u, u, u}}, cfg)[0];
    CHECK(c.alpha > last_alpha);
    CHECK(c.beta > last_beta);
    CHECK(c.gamma > last_gamma);
    CHECK(c.eta_anchor > last_eta);
    CHECK(c.lambda_task < last_lambda);
    last_alpha = c.alpha;
    last_beta = c.beta;
    last_gamma = c.gamma;
    last_eta = c.eta_anchor;
    last_lambda = c.lambda_task;
  }
  CalibrationConfig bad;
  bad.kappa = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.warmup_fraction = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("warm-up profiles")
{
  // Agent 2 never changes; agents 0 and 1 behave identically.
  const std::vector<DebateTrajectory> warmup{
      oracle::make({{0, 0, 1}, {1, 1, 1}}, 2, "a", 1),
      oracle::make({{1, 1, 1}, {1, 1, 1}}, 2, "b", 1),
      oracle::make({{0, 0, 1}, {0, 0, 1}}, 2, "c", 0),
      oracle::make({{1, 1, 1}, {0, 0, 1}}, 2, "d", 0),
  };
  const auto p = warmup_profile(warmup, 3);
  CHECK(p[2].u_intra_bar == 0.0);
  CHECK(p[0].u_intra_bar == doctest::Approx(0.5));
  CHECK(p[0].u_intra_bar == p[1].u_intra_bar);
  CHECK(p[0].u_inter_bar == p[1].u_inter_bar);
  CHECK(p[0].loo_bar == p[1].loo_bar);
  // Dropping agent 2 from [0,0,1] or [1,1,1] never changes the plurality.
  CHECK(p[2].loo_bar == 0.0);
  for (const auto &a : p) CHECK(a.u_sys_bar == doctest::Approx((a.u_intra_bar + a.u_inter_bar + a.loo_bar) / 3));

  // Removing agent 0 flips the vote only in the first trajectory.
  const std::vector<DebateTrajectory> loo{
      oracle::make({{0, 1, 2}, {0, 1, 2}}, 3, "w", 0),
      oracle::make({{0, 0, 0}, {0, 0, 0}}, 3, "x", 0),
      oracle::make({{1, 1, 1}, {1, 1, 1}}, 3, "y", 1),
      oracle::make({{2, 1, 1}, {2, 1, 1}}, 3, "z", 1),
  };
  CHECK(warmup_profile(loo, 3)[0].loo_bar == doctest::Approx(0.25));
  CHECK_THROWS(warmup_profile(std::vector<DebateTrajectory>{}, 3));
}

TEST_CASE("warm-up split is a disjoint prefix")
{
  const auto qs = generate_questions(37, DifficultySpec{}, 4, 1);
  const auto split = split_warmup(qs, 0.1);
  CHECK(split.warmup.size() == 4);
  CHECK(split.train.size() == 33);
  std::set<std::string> warm;
  for (const auto &q : split.warmup) warm.insert(q.id);
  for (const auto &q : split.train) CHECK(warm.count(q.id) == 0);
  CHECK_THROWS(split_warmup(std::span(qs).first(1), 0.5));
}

TEST_CASE("replay scores")
{
  const auto stable = oracle::make({{1, 1, 1}, {1, 1, 1}}, 3, "s", 1);
  CHECK(replay_score(stable, {}) == 0.0);

  // Complements 0.25, 2/3 and 5/6 on the two-agent fixture.
  const auto worked = oracle::make({{0, 0}, {1, 0}, {1, 0}}, 2, "w", 0);
  CHECK(replay_score(worked, {}) == doctest::Approx(0.25 + 2.0 / 3 + 5.0 / 6).epsilon(1e-12));
  CHECK(replay_score(worked, {2, 2, 2}) == doctest::Approx(2 * replay_score(worked, {})));
  CHECK(replay_score(worked, {1, 0, 0}) == doctest::Approx(0.25));
}

TEST_CASE("buffer is a bounded FIFO")
{
  ReplayBuffer b(100);
  for (int n = 0; n < 150; ++n) b.push(entry(1.0, "q" + std::to_string(n)));
  CHECK(b.size() == 100);
  CHECK(b[0].trajectory.question_id() == "q50");
  CHECK(b[99].trajectory.question_id() == "q149");
  CHECK_THROWS(b.push(entry(-1.0)));
  CHECK_THROWS_AS(ReplayBuffer(0), ConfigError);
  CHECK_THROWS_AS(ReplayBuffer(4, -0.5), ConfigError);
}

TEST_CASE("sampling from an empty buffer fails")
{
  ReplayBuffer b(8);
  RandomStream s(1, {});
  CHECK_THROWS_WITH(replay_sample(b, 3, s), "replay buffer is empty");
}

TEST_CASE("priorities follow score to the exponent")
{
  ReplayBuffer b(8, 1.0);
  b.push(entry(0.2, "a"));
  b.push(entry(0.4, "b"));
  const auto p = b.probabilities();
  CHECK(p[0] == doctest::Approx(1.0 / 3));
  CHECK(p[1] == doctest::Approx(2.0 / 3));

  RandomStream s(3, {});
  const int draws = 10000;
  int first = 0;
  for (const auto &d : replay_sample(b, draws, s)) first += d.index == 0 ? 1 : 0;
  const double sd = std::sqrt(draws * (1.0 / 3) * (2.0 / 3));
  CHECK(std::abs(first - draws / 3.0) < 3 * sd);

  ReplayBuffer uniform(8, 0.0);
  uniform.push(entry(0.2, "a"));
  uniform.push(entry(0.0, "b"));
  uniform.push(entry(0.9, "c"));
  RandomStream u(4, {});
  for (const auto &d : replay_sample(uniform, 50, u)) CHECK(d.weight == doctest::Approx(1.0));

  ReplayBuffer zero(8, 1.0);
  zero.push(entry(0.0, "a"));
  zero.push(entry(0.0, "b"));
  CHECK(zero.probabilities() == std::vector<double>{0.5, 0.5});
}

TEST_CASE("sample frequencies pass a chi-square fit")
{
  const std::vector<double> scores{0.1, 0.5, 0.9, 1.7, 0.3};
  for (const double eta : {0.0, 1.0, 2.0}) {
    CAPTURE(eta);
    ReplayBuffer b(16, eta);
    for (std::size_t n = 0; n < scores.size(); ++n) b.push(entry(scores[n], std::to_string(n)));
    double total = 0.0;
    for (const double v : scores) total += std::pow(v, eta);
    RandomStream s(9, {static_cast<std::uint64_t>(eta * 10)});
    const int draws = 10000;
    std::vector<int> counts(scores.size(), 0);
    for (const auto &d : replay_sample(b, draws, s)) ++counts[d.index];
    double chi2 = 0.0;
    for (std::size_t n = 0; n < scores.size(); ++n) {
      const double expected = draws * std::pow(scores[n], eta) / total;
      chi2 += (counts[n] - expected) * (counts[n] - expected) / expected;
    }
    const boost::math::chi_squared dist(static_cast<double>(scores.size() - 1));
    CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 0.01);
  }
}

TEST_CASE("importance weights recover the uniform mean")
{
  const std::vector<double> scores{0.1, 0.5, 0.9, 1.7, 0.3};
  const std::vector<double> stat{3.0, -1.0, 0.5, 2.0, 7.0};
  ReplayBuffer b(16, 1.0);
  for (std::size_t n = 0; n < scores.size(); ++n) b.push(entry(scores[n], std::to_string(n)));
  const double target = (3.0 - 1.0 + 0.5 + 2.0 + 7.0) / 5;

  const int reps = 400;
  std::vector<double> estimates;
  for (int r = 0; r < reps; ++r) {
    RandomStream s(21, {static_cast<std::uint64_t>(r)});
    double sum = 0.0;
    const auto draws = replay_sample(b, 50, s);
    for (const auto &d : draws) sum += d.weight * stat[d.index];
    estimates.push_back(sum / 50);
  }
  double mean = 0.0;
  for (const double e : estimates) mean += e;
  mean /= reps;
  double var = 0.0;
  for (const double e : estimates) var += (e - mean) * (e - mean);
  var /= reps - 1;
  CHECK(std::abs(mean - target) < 3 * std::sqrt(var / reps));
}

TEST_CASE("refresh re-rolls deterministically and dumps round-trip")
{
  SimParams params;
  const DebateEnvironment env(params, make_agents(3, 0.8, 0.4, 0), 2);
  const auto qs = generate_questions(20, DifficultySpec{}, 4, 5);
  const std::vector<PolicyTable> policies(3, PolicyTable(4));
  ReplayBuffer a(32);
  for (std::size_t n = 0; n < qs.size(); ++n) {
    auto tr = env.rollout(qs[n], policies, n);
    const double s = replay_score(tr, {});
    a.push({std::move(tr), s, n, 0});
  }
  auto b = a;
  buffer_refresh(a, env, qs, policies, 4, 77, {});
  buffer_refresh(b, env, qs, policies, 4, 77, {});
  for (std::size_t n = 0; n < a.size(); ++n) {
    CHECK(a[n].score == b[n].score);
    CHECK(a[n].policy_version == 4);
    CHECK(a[n].score == doctest::Approx(replay_score(a[n].trajectory, {})));
  }

  std::stringstream ss;
  write_replay_buffer(ss, a);
  const auto restored = read_replay_buffer(ss, 32, 1.0);
  REQUIRE(restored.size() == a.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    CHECK(restored[n].trajectory == a[n].trajectory);
    CHECK(restored[n].score == a[n].score);
    CHECK(restored[n].policy_version == 4);
  }

  std::istringstream plain(format_trajectory_line(a[0].trajectory) + "\n");
  CHECK_THROWS_AS(read_replay_buffer(plain, 32, 1.0), ParseError);
  CHECK_THROWS(buffer_refresh(a, env, std::span(qs).first(3), policies, 5, 1, {}));
}
