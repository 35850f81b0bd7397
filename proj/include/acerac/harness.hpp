#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "acerac/config.hpp"
#include "acerac/envs.hpp"
#include "acerac/mlp.hpp"

namespace acerac {

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over episodes
  std::vector<double> returns;
};

/// Runs full episodes with the deterministic policy: actions are the clipped
/// actor mean, no exploration noise. Reads theta only.
EvalResult evaluate(const Mlp& actor, const VectorXd& theta, const Environment& env,
                    int episodes, Rng& rng);

struct CurvePoint {
  std::int64_t env_steps = 0;
  double mean_test_return = 0.0;
  double std_test_return = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::vector<CurvePoint> curve;
  std::int64_t updates = 0;
  std::int64_t aborted_updates = 0;
  std::int64_t skipped_adam_steps = 0;
};

struct RunOptions {
  int jobs = 1;  // seeds trained concurrently
  std::function<void(const std::string&)> log;  // progress lines; may be empty
};

struct RunResult {
  ResolvedConfig resolved;
  std::vector<SeedResult> seeds;
};

/// Trains every seed of cfg and writes, under cfg.out:
///   config.txt            the base config (loadable with --config)
///   resolved_config.txt   the values actually used at this d
///   manifest.json         resolved config, code version, per-seed status
///   seed_<k>/curve.csv    env_steps,mean_test_return,std_test_return
///   seed_<k>/actor.bin, seed_<k>/critic.bin   final parameters
/// A seed whose parameters turn non-finite is marked failed; the others run on.
RunResult run(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Trains a single seed without touching the filesystem.
SeedResult train_seed(const ResolvedConfig& cfg, std::uint64_t seed, VectorXd* theta_out = nullptr,
                      VectorXd* nu_out = nullptr,
                      const std::function<void(const std::string&)>& log = {});

std::string curve_csv(const std::vector<CurvePoint>& curve);
/// Throws std::runtime_error describing the first malformed line.
std::vector<CurvePoint> read_curve_csv(const std::string& path);

struct SummaryRow {
  std::string dir;
  std::string env;
  int d = 1;
  std::string variant;
  int seeds = 0;
  double final_mean = 0.0;  // mean over seeds of the final-10% mean test return
  double final_std = 0.0;   // spread of that quantity across seeds
};

struct CompareReport {
  std::vector<SummaryRow> rows;       // by env, then d, then final_mean descending
  std::vector<std::string> problems;  // missing or corrupt inputs, excluded from rows
};

/// Mean of mean_test_return over the last 10% of evaluations (at least one).
double final_window_mean(const std::vector<CurvePoint>& curve);
/// Same over the first 10%.
double initial_window_mean(const std::vector<CurvePoint>& curve);

CompareReport compare(const std::vector<std::string>& run_dirs);
std::string format_report(const CompareReport& report);
std::string report_csv(const CompareReport& report);

/// Version string baked in at build time.
std::string code_version();

}  // namespace acerac
