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


#ifndef MADLAB_CONFIG_HPP
#define MADLAB_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "madlab/calibration.hpp"
#include "madlab/metrics.hpp"
#include "madlab/sim.hpp"
#include "madlab/stats.hpp"
#include "madlab/udpo.hpp"

namespace madlab
{

struct EnvironmentConfig {
  std::size_t num_agents{5};
  std::size_t rounds{5};
  std::size_t answer_space_size{4};
  std::size_t difficulty_bins{3};
  std::size_t compromised_count{0};
  AdversarialTargetPolicy adversarial_target_policy{AdversarialTargetPolicy::kFixedDistractor};
  std::uint64_t seed{1};
  std::size_t train_questions{500};
  std::size_t eval_questions{200};
  DifficultySpec difficulty{};
  double skill_max{0.9};
  double skill_min{0.3};
  double prior_strength{4.0};
  double prior_noise{0.5};
  double stickiness{0.5};
  double conformity{1.5};

  [[nodiscard]] SimParams sim_params() const;
};

struct ReplayConfig {
  bool enabled{true};
  std::size_t capacity{1024};
  double priority_exponent{1.0};
  std::size_t refresh_period{10};
  double fraction{0.25};
};

struct AnalysisConfig {
  std::vector<double> k_grid{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<double> strata{0.2, 0.4, 0.6, 0.8};
  UncertaintyMetric ranking_metric{UncertaintyMetric::kSys};
};

enum class SweepAxis { kAgents, kRounds, kCompromised };
enum class Pipeline { kBaseline, kUdpo };

struct SweepConfig {
  SweepAxis axis{SweepAxis::kRounds};
  std::vector<std::size_t> values{3, 5, 10};
  Pipeline pipeline{Pipeline::kBaseline};
};

std::optional<SweepAxis> parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

struct ExperimentConfig {
  EnvironmentConfig environment;
  MetricConfig metric;
  ClipConfig udpo;
  CalibrationConfig calibration;
  ReplayConfig replay;
  AnalysisConfig analysis;
  SweepConfig sweep;
  std::filesystem::path output_dir{"out"};

  /// Throws ConfigError naming the offending key.
  void validate() const;

  /// Canonical `[block] key = value` text; parses back to an equal config.
  [[nodiscard]] std::string to_ini() const;

  /// FNV-1a of to_ini().
  [[nodiscard]] std::uint64_t hash() const;
};

/// Strict parse: unknown blocks and keys are ConfigErrors. Missing keys keep
/// their defaults.
ExperimentConfig parse_config(std::istream &in);
ExperimentConfig load_config(const std::filesystem::path &path);

}  // namespace madlab

#endif  // MADLAB_CONFIG_HPP
