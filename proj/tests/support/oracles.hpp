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


// Brute-force reference implementations written directly from the metric
// definitions, with no shared code paths with the library.

#ifndef MADLAB_TESTS_ORACLES_HPP
#define MADLAB_TESTS_ORACLES_HPP

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "madlab/debate.hpp"

namespace oracle
{

/// grid[t][i] as plain label indices.
using Grid = std::vector<std::vector<int>>;

inline Grid
grid_of(const madlab::DebateTrajectory &tr)
{
  Grid g(tr.rounds() + 1, std::vector<int>(tr.num_agents()));
  for (std::size_t t = 0; t <= tr.rounds(); ++t) {
    for (std::size_t i = 0; i < tr.num_agents(); ++i) g[t][i] = tr.at(t, i).index;
  }
  return g;
}

inline madlab::DebateTrajectory
make(const Grid &g, int k, std::string id = "q", int truth = -1)
{
  std::vector<std::string> space;
  for (int c = 0; c < k; ++c) space.emplace_back(1, static_cast<char>('A' + c));
  std::vector<std::vector<madlab::AnswerLabel>> grid;
  for (const auto &row : g) {
    auto &r = grid.emplace_back();
    for (const int v : row) r.push_back(madlab::AnswerLabel{static_cast<std::uint16_t>(v)});
  }
  std::optional<madlab::AnswerLabel> gt;
  if (truth >= 0) gt = madlab::AnswerLabel{static_cast<std::uint16_t>(truth)};
  return madlab::DebateTrajectory(std::move(id), std::move(space), std::move(grid), gt);
}

inline madlab::DebateTrajectory
random_trajectory(std::mt19937_64 &rng, int max_agents, int max_rounds, int max_labels, std::string id = "q")
{
  const int n = std::uniform_int_distribution<int>(2, max_agents)(rng);
  const int t = std::uniform_int_distribution<int>(1, max_rounds)(rng);
  const int k = std::uniform_int_distribution<int>(2, max_labels)(rng);
  std::uniform_int_distribution<int> label(0, k - 1);
  Grid g(t + 1, std::vector<int>(n));
  for (auto &row : g) {
    for (auto &v : row) v = label(rng);
  }
  return make(g, k, std::move(id), label(rng));
}

inline double
flip_rate(const Grid &g)
{
  const auto rounds = g.size() - 1;
  const auto n = g[0].size();
  int flips = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 1; t <= rounds; ++t) flips += g[t][i] != g[t - 1][i];
  }
  return flips / static_cast<double>(n * rounds);
}

inline double
revision(const Grid &g)
{
  int changed = 0;
  for (std::size_t i = 0; i < g[0].size(); ++i) changed += g.back()[i] != g.front()[i];
  return changed / static_cast<double>(g[0].size());
}

inline double
conflict(const std::vector<int> &row)
{
  int disagree = 0;
  int pairs = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    for (std::size_t j = i + 1; j < row.size(); ++j) {
      ++pairs;
      disagree += row[i] != row[j];
    }
  }
  return disagree / static_cast<double>(pairs);
}

inline double
inter(const Grid &g)
{
  double total = 0.0;
  for (const auto &row : g) total += conflict(row);
  return total / static_cast<double>(g.size());
}

/// Plurality winner by scanning labels in increasing order.
inline int
plurality(const std::vector<int> &votes)
{
  int best = -1;
  int best_count = 0;
  for (int label = 0; label < 32; ++label) {
    int c = 0;
    for (const int v : votes) c += v == label;
    if (c > best_count) {
      best = label;
      best_count = c;
    }
  }
  return best;
}

inline double
entropy(const std::vector<int> &row)
{
  std::vector<int> distinct;
  for (const int v : row) {
    bool seen = false;
    for (const int d : distinct) seen = seen || d == v;
    if (!seen) distinct.push_back(v);
  }
  if (distinct.size() < 2) return 0.0;
  double h = 0.0;
  for (const int d : distinct) {
    int c = 0;
    for (const int v : row) c += v == d;
    const double p = c / static_cast<double>(row.size());
    h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(distinct.size()));
}

inline int
disagreement(const std::vector<int> &row)
{
  for (const int v : row) {
    if (v != row[0]) return 1;
  }
  return 0;
}

inline double
loo(const std::vector<int> &row)
{
  const int full = plurality(row);
  int changed = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    std::vector<int> rest;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j != i) rest.push_back(row[j]);
    }
    changed += plurality(rest) != full;
  }
  return changed / static_cast<double>(row.size());
}

inline double
sys(const Grid &g)
{
  return (entropy(g.back()) + disagreement(g.back()) + loo(g.back())) / 3.0;
}

}  // namespace oracle

#endif  // MADLAB_TESTS_ORACLES_HPP
