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


#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "madlab/config.hpp"
#include "madlab/error.hpp"
#include "madlab/harness.hpp"

namespace
{

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void
add_common(CLI::App *cmd, CommonOptions &opts)
{
  cmd->add_option("--config", opts.config_path, "Experiment config (INI)")->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_dir, "Output directory (overrides [output] dir)");
  cmd->add_option("--seed", opts.seed, "Root seed (overrides [environment] seed)");
}

madlab::ExperimentConfig
resolve(const CommonOptions &opts)
{
  auto config = opts.config_path.empty() ? madlab::ExperimentConfig{} : madlab::load_config(opts.config_path);
  if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
  if (opts.seed) config.environment.seed = *opts.seed;
  config.validate();
  return config;
}

void
finish(const madlab::Artifacts &artifacts, const madlab::ExperimentConfig &config)
{
  for (const auto &w : artifacts.warnings) std::cerr << "warning: " << w << '\n';
  madlab::write_artifacts(artifacts, config.output_dir);
  std::cout << fmt::format("wrote {} files to {}\n", artifacts.files.size(), config.output_dir.string());
}

void
print_rows(std::span<const madlab::EvalSummary> rows)
{
  std::cout << madlab::render_summary_csv(rows);
}

}  // namespace

int
main(int argc, char **argv)
{
  CLI::App app{"madlab: uncertainty-driven multi-agent debate experiments"};
  app.require_subcommand(1);

  CommonOptions opts;

  auto *baseline = app.add_subcommand("baseline", "Evaluate untrained debate ensembles");
  add_common(baseline, opts);

  auto *train = app.add_subcommand("train", "Warm up, calibrate, train and evaluate");
  add_common(train, opts);
  std::string zero;
  train->add_option("--zero", zero, "Ablate one reward component")->check(CLI::IsMember({"alpha", "beta", "gamma"}));

  auto *attack = app.add_subcommand("attack", "Evaluate ensembles with compromised agents");
  add_common(attack, opts);
  std::vector<std::size_t> compromised;
  attack->add_option("--compromised", compromised, "Number of compromised agents (repeatable)");

  auto *analyze = app.add_subcommand("analyze", "Statistical reports over trajectory files");
  add_common(analyze, opts);
  std::vector<std::string> inputs;
  analyze->add_option("--input,inputs", inputs, "Trajectory .jsonl files")->required();

  auto *sweep = app.add_subcommand("sweep", "Repeat a pipeline across one axis");
  add_common(sweep, opts);
  std::string axis;
  sweep->add_option("--axis", axis, "Sweep axis")->check(CLI::IsMember({"agents", "rounds", "compromised"}));
  std::vector<std::size_t> values;
  sweep->add_option("--values", values, "Axis values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto config = resolve(opts);
    if (baseline->parsed()) {
      const auto result = madlab::run_baseline(config);
      print_rows(std::span(&result.eval.summary, 1));
      finish(result.artifacts, config);
    } else if (train->parsed()) {
      std::optional<madlab::RewardComponent> zeroed;
      if (!zero.empty()) zeroed = madlab::parse_reward_component(zero);
      const auto result = madlab::run_udpo(config, zeroed);
      const madlab::EvalSummary rows[] = {result.baseline.summary, result.trained.summary};
      print_rows(rows);
      finish(result.artifacts, config);
    } else if (attack->parsed()) {
      if (compromised.empty()) compromised.push_back(config.environment.compromised_count);
      const auto result = madlab::run_attack(config, compromised);
      print_rows(result.rows);
      finish(result.artifacts, config);
    } else if (analyze->parsed()) {
      const std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      const auto result = madlab::run_analysis(paths, config);
      std::cout << fmt::format("{} records, {} excluded\n", result.records.size(), result.excluded);
      finish(result.artifacts, config);
    } else if (sweep->parsed()) {
      if (!axis.empty()) config.sweep.axis = *madlab::parse_sweep_axis(axis);
      if (!values.empty()) config.sweep.values = values;
      const auto result = madlab::run_sweep(config);
      print_rows(result.rows);
      finish(result.artifacts, config);
    }
  } catch (const madlab::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
