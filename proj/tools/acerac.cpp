// acerac train | eval | compare
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acerac/harness.hpp"

namespace fs = std::filesystem;
using namespace acerac;

namespace {

struct TrainArgs {
  std::string config_file;
  // flag name -> config key; only flags given on the command line are applied
  std::map<std::string, std::string> values;
  std::vector<std::uint64_t> seeds;
  bool white_noise = false;
  int jobs = 1;
  bool quiet = false;
};

const std::vector<std::pair<std::string, std::string>> kTrainFlags = {
    {"env", "env"},
    {"d", "d"},
    {"steps", "steps"},
    {"eval-interval", "eval_interval"},
    {"eval-episodes", "eval_episodes"},
    {"alpha", "alpha"},
    {"n", "n"},
    {"b", "b"},
    {"sigma", "sigma"},
    {"gamma", "gamma"},
    {"actor-lr", "actor_lr"},
    {"critic-lr", "critic_lr"},
    {"minibatch", "minibatch"},
    {"learning-start", "learning_start"},
    {"capacity", "capacity"},
    {"hidden", "hidden"},
    {"out", "out"},
};

int do_train(const TrainArgs& a) {
  ExperimentConfig cfg = a.config_file.empty() ? ExperimentConfig{} : load_config_file(a.config_file);
  for (const auto& [flag, key] : kTrainFlags) {
    if (auto it = a.values.find(flag); it != a.values.end()) set_config_value(cfg, key, it->second);
  }
  if (!a.seeds.empty()) cfg.seeds = a.seeds;
  if (a.white_noise) cfg.white_noise = true;

  const ResolvedConfig rc = resolve(cfg);
  if (!a.quiet) std::cerr << format_entries(resolved_entries(rc));
  RunOptions opts;
  opts.jobs = a.jobs;
  if (!a.quiet) opts.log = [](const std::string& line) { std::cerr << line << "\n"; };
  const RunResult res = run(cfg, opts);

  int failed = 0;
  for (const auto& s : res.seeds) {
    if (!s.ok) {
      ++failed;
      continue;
    }
    std::printf("seed %llu final test return %.3f (updates %lld)\n",
                static_cast<unsigned long long>(s.seed), s.curve.back().mean_test_return,
                static_cast<long long>(s.updates));
  }
  std::printf("wrote %s\n", cfg.out.c_str());
  return failed == 0 ? 0 : 3;
}

int do_eval(const std::string& checkpoint, int episodes, std::string env_id, int d,
            std::uint64_t seed) {
  auto [net, theta] = load_params_file(checkpoint);
  if (env_id.empty() || d == 0) {
    // Checkpoints written by train sit in <out>/seed_<k>/ next to <out>/config.txt.
    const fs::path conf = fs::path(checkpoint).parent_path().parent_path() / "config.txt";
    if (!fs::exists(conf)) {
      throw std::runtime_error("no config.txt found near the checkpoint; pass --env and --d");
    }
    const ExperimentConfig cfg = load_config_file(conf.string());
    if (env_id.empty()) env_id = cfg.env;
    if (d == 0) d = cfg.d;
  }
  const Environment env(make_env_spec(env_id, d));
  if (net.input_dim() != env.spec().state_dim || net.output_dim() != env.spec().action_dim) {
    throw std::runtime_error("checkpoint network does not match environment " + env_id);
  }
  Rng rng = make_stream(seed, Stream::kEval);
  const EvalResult r = evaluate(net, theta, env, episodes, rng);
  for (std::size_t i = 0; i < r.returns.size(); ++i) {
    std::printf("episode %zu return %.6f\n", i, r.returns[i]);
  }
  std::printf("mean %.6f std %.6f\n", r.mean, r.std);
  return 0;
}

int do_compare(const std::vector<std::string>& dirs, const std::string& csv_path) {
  const CompareReport rep = compare(dirs);
  std::cout << format_report(rep);
  if (!csv_path.empty()) {
    std::ofstream os(csv_path);
    if (!os) throw std::runtime_error("cannot write " + csv_path);
    os << report_csv(rep);
  }
  return rep.rows.empty() ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ACERAC: actor-critic with experience replay and autocorrelated actions"};
  app.set_version_flag("--version", code_version());
  app.require_subcommand(1);

  TrainArgs targs;
  auto* train = app.add_subcommand("train", "train one or more seeds and write run artifacts");
  train->add_option("--config", targs.config_file, "key = value config file")->check(CLI::ExistingFile);
  for (const auto& [flag, key] : kTrainFlags) {
    train->add_option_function<std::string>(
        "--" + flag, [&targs, f = flag](const std::string& v) { targs.values[f] = v; },
        "overrides config key '" + key + "'");
  }
  train->add_option("--seed,--seeds", targs.seeds, "seed(s); repeat or comma-separate")
      ->delimiter(',');
  train->add_flag("--white-noise", targs.white_noise, "ablation: alpha = 0, n = 1");
  train->add_option("--jobs", targs.jobs, "seeds trained in parallel")->check(CLI::PositiveNumber);
  train->add_flag("-q,--quiet", targs.quiet, "no progress output");

  std::string checkpoint, eval_env;
  int episodes = 5, eval_d = 0;
  std::uint64_t eval_seed = 0;
  auto* ev = app.add_subcommand("eval", "evaluate a saved actor without exploration");
  ev->add_option("--checkpoint", checkpoint, "actor.bin written by train")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--episodes", episodes, "test episodes")->check(CLI::PositiveNumber);
  ev->add_option("--env", eval_env, "environment id (default: from the run's config.txt)");
  ev->add_option("--d", eval_d, "discretization factor (default: from the run's config.txt)");
  ev->add_option("--seed", eval_seed, "seed for episode resets");

  std::vector<std::string> dirs;
  std::string csv_path;
  auto* cmp = app.add_subcommand("compare", "summarize final returns of completed runs");
  cmp->add_option("dirs", dirs, "run output directories")->required();
  cmp->add_option("--csv", csv_path, "also write the summary as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return do_train(targs);
    if (*ev) return do_eval(checkpoint, episodes, eval_env, eval_d, eval_seed);
    if (*cmp) return do_compare(dirs, csv_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
