#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "acerac/trainer.hpp"

namespace acerac {

/// Experiment settings at the base time discretization. resolve() derives
/// the values actually used at discretization factor d.
struct ExperimentConfig {
  std::string env = "pendulum";
  int d = 1;
  std::int64_t steps = 200'000;       // base-rate environment steps
  std::int64_t eval_interval = 5'000;  // base-rate steps between evaluations
  int eval_episodes = 5;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  int n = 2;
  double alpha = 0.5;
  double sigma = 0.3;
  double gamma = 0.99;
  double b = 2.0;
  double actor_lr = 1e-4;
  double critic_lr = 3e-4;
  int gradient_steps = 1;
  std::int64_t learning_start = 1'000;
  double penalty_weight = 1.0;
  int minibatch = 32;
  std::int64_t capacity = 1'000'000;
  std::vector<int> hidden = {64, 64};
  bool white_noise = false;  // alpha = 0, n = 1 ablation

  std::string out = "runs/acerac";
};

struct ResolvedConfig {
  std::string env;
  int d = 1;
  std::string variant;  // "acerac" or "white_noise"
  std::int64_t total_steps = 0;
  std::int64_t eval_interval = 0;
  std::int64_t update_interval = 1;  // environment steps per training tick
  int eval_episodes = 5;
  std::size_t capacity = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<int> hidden;
  AlgoConfig algo;
};

/// Applies the discretization scalings:
///   gamma -> gamma^(1/d), n -> n d, alpha -> alpha^(1/d), capacity, steps,
///   eval interval and learning start -> x d, one training tick per d steps.
/// The white-noise ablation pins alpha = 0 and n = 1 at every d.
/// Throws std::invalid_argument naming the offending field.
ResolvedConfig resolve(const ExperimentConfig& cfg);

/// Sets one field from its textual value; throws naming the key on failure.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Flat "key = value" text; '#' starts a comment.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg);
std::vector<std::pair<std::string, std::string>> resolved_entries(const ResolvedConfig& cfg);
std::string format_entries(const std::vector<std::pair<std::string, std::string>>& entries);

/// Shortest round-trip decimal text for a double.
std::string format_double(double v);

}  // namespace acerac
