#include "acerac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "acerac/ar_process.hpp"
#include "acerac/policy.hpp"
#include "acerac/replay.hpp"
#include "acerac/trainer.hpp"

#ifndef ACERAC_VERSION
#define ACERAC_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace acerac {

std::string code_version() { return ACERAC_VERSION; }

EvalResult evaluate(const Mlp& actor, const VectorXd& theta, const Environment& env,
                    int episodes, Rng& rng) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  EvalResult res;
  for (int e = 0; e < episodes; ++e) {
    EnvState st = env.reset(rng);
    double ret = 0.0;
    for (;;) {
      const VectorXd a = env.spec().bounds.clamp(actor.forward(theta, env.observe(st)));
      StepResult sr = env.step(st, a);
      ret += sr.reward;
      st = std::move(sr.next);
      if (sr.terminal || sr.truncated) break;
    }
    res.returns.push_back(ret);
  }
  double sum = 0.0;
  for (double r : res.returns) sum += r;
  res.mean = sum / episodes;
  double ss = 0.0;
  for (double r : res.returns) ss += (r - res.mean) * (r - res.mean);
  res.std = std::sqrt(ss / episodes);
  return res;
}

SeedResult train_seed(const ResolvedConfig& cfg, std::uint64_t seed, VectorXd* theta_out,
                      VectorXd* nu_out, const std::function<void(const std::string&)>& log) {
  const Environment env(make_env_spec(cfg.env, cfg.d));
  const EnvSpec& spec = env.spec();
  const AlgoConfig& algo = cfg.algo;

  std::vector<int> actor_w{spec.state_dim};
  actor_w.insert(actor_w.end(), cfg.hidden.begin(), cfg.hidden.end());
  actor_w.push_back(spec.action_dim);
  std::vector<int> critic_w{spec.action_dim + spec.state_dim};
  critic_w.insert(critic_w.end(), cfg.hidden.begin(), cfg.hidden.end());
  critic_w.push_back(1);

  const CovKernel kernel = CovKernel::isotropic(spec.action_dim, algo.sigma);
  NeuralArPolicy policy(Mlp(actor_w), algo.n, algo.alpha, kernel, spec.bounds);
  const Acerac learner(policy, Mlp(critic_w), algo);
  const Mlp& actor = learner.policy().actor();

  Rng init_rng = make_stream(seed, Stream::kInit);
  Rng noise_rng = make_stream(seed, Stream::kNoise);
  Rng env_rng = make_stream(seed, Stream::kEnv);
  Rng batch_rng = make_stream(seed, Stream::kMinibatch);

  VectorXd theta = actor.init_params(init_rng);
  VectorXd nu = learner.critic().init_params(init_rng);
  AdamState actor_opt(theta.size(), AdamConfig{algo.actor_step_size});
  AdamState critic_opt(nu.size(), AdamConfig{algo.critic_step_size});
  ReplayBuffer buffer(cfg.capacity, algo.n, spec.state_dim, spec.action_dim);
  ArNoise noise(algo.alpha, kernel);

  SeedResult res;
  res.seed = seed;

  auto eval_now = [&](std::int64_t t) {
    // Same resets at every evaluation so curve points are comparable.
    Rng eval_rng = make_stream(seed, Stream::kEval);
    const EvalResult ev = evaluate(actor, theta, env, cfg.eval_episodes, eval_rng);
    res.curve.push_back({t, ev.mean, ev.std});
    if (log) {
      std::ostringstream os;
      os << "seed " << seed << " step " << t << " test return " << ev.mean << " +- " << ev.std;
      log(os.str());
    }
  };

  try {
    EnvState st;
    bool need_reset = true;
    std::optional<VectorXd> prev_xi;
    for (std::int64_t t = 0; t < cfg.total_steps; ++t) {
      if (t % cfg.eval_interval == 0) eval_now(t);

      bool start = false;
      if (need_reset) {
        st = env.reset(env_rng);
        noise.reset(noise_rng);
        prev_xi.reset();
        start = true;
      } else {
        noise.step(noise_rng);
      }
      const VectorXd obs = env.observe(st);
      const PolicyOutput out = policy.act(theta, obs, noise);
      StepResult sr = env.step(st, out.action);

      ReplayRecord rec;
      const VectorXd xi = out.raw_action - out.mean;
      rec.state = obs;
      rec.raw_action = out.raw_action;
      rec.reward = sr.reward;
      rec.mean = out.mean;
      rec.log_behavior_density = policy.step_log_density(prev_xi, xi);
      rec.episode_start = start;
      rec.terminal = sr.terminal;
      rec.truncated = sr.truncated;
      if (rec.ends_episode()) rec.final_state = env.observe(sr.next);
      buffer.push(rec);

      prev_xi = xi;
      need_reset = rec.ends_episode();
      st = std::move(sr.next);

      if (t + 1 >= algo.learning_start && (t + 1) % cfg.update_interval == 0) {
        const UpdateDiagnostics diag =
            learner.train_step(buffer, theta, nu, actor_opt, critic_opt, batch_rng);
        res.updates += diag.updates;
        res.aborted_updates += diag.aborted;
        if (!theta.allFinite() || !nu.allFinite()) {
          throw std::runtime_error("non-finite parameters after update at step " +
                                   std::to_string(t + 1));
        }
      }
    }
    eval_now(cfg.total_steps);
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
  }
  res.skipped_adam_steps = actor_opt.skipped + critic_opt.skipped;
  if (theta_out) *theta_out = theta;
  if (nu_out) *nu_out = nu;
  return res;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string s = "env_steps,mean_test_return,std_test_return\n";
  for (const auto& p : curve) {
    s += std::to_string(p.env_steps) + "," + format_double(p.mean_test_return) + "," +
         format_double(p.std_test_return) + "\n";
  }
  return s;
}

std::vector<CurvePoint> read_curve_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error(path + ": cannot open");
  std::string line;
  if (!std::getline(is, line) || line != "env_steps,mean_test_return,std_test_return") {
    throw std::runtime_error(path + ": missing or wrong header row");
  }
  std::vector<CurvePoint> curve;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c, extra;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') ||
        std::getline(ss, extra, ',')) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 3 columns");
    }
    try {
      std::size_t pa = 0, pb = 0, pc = 0;
      CurvePoint p{std::stoll(a, &pa), std::stod(b, &pb), std::stod(c, &pc)};
      if (pa != a.size() || pb != b.size() || pc != c.size()) throw std::invalid_argument("trailing");
      curve.push_back(p);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  if (curve.empty()) throw std::runtime_error(path + ": no data rows");
  return curve;
}

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

std::size_t window_rows(std::size_t total) {
  return std::max<std::size_t>(1, (total + 9) / 10);
}

}  // namespace

double final_window_mean(const std::vector<CurvePoint>& curve) {
  if (curve.empty()) throw std::invalid_argument("final_window_mean: empty curve");
  const std::size_t k = window_rows(curve.size());
  double s = 0.0;
  for (std::size_t i = curve.size() - k; i < curve.size(); ++i) s += curve[i].mean_test_return;
  return s / static_cast<double>(k);
}

double initial_window_mean(const std::vector<CurvePoint>& curve) {
  if (curve.empty()) throw std::invalid_argument("initial_window_mean: empty curve");
  const std::size_t k = window_rows(curve.size());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += curve[i].mean_test_return;
  return s / static_cast<double>(k);
}

RunResult run(const ExperimentConfig& cfg, const RunOptions& opts) {
  RunResult result;
  result.resolved = resolve(cfg);
  const ResolvedConfig& rc = result.resolved;
  const fs::path out(cfg.out);
  fs::create_directories(out);
  write_text(out / "config.txt", format_entries(config_entries(cfg)));
  write_text(out / "resolved_config.txt", format_entries(resolved_entries(rc)));

  result.seeds.resize(rc.seeds.size());
  std::mutex log_mu;
  auto log = [&](const std::string& line) {
    if (!opts.log) return;
    std::lock_guard<std::mutex> lock(log_mu);
    opts.log(line);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < rc.seeds.size(); i = next++) {
      const std::uint64_t seed = rc.seeds[i];
      VectorXd theta, nu;
      SeedResult sr = train_seed(rc, seed, &theta, &nu, log);
      const fs::path dir = out / ("seed_" + std::to_string(seed));
      fs::create_directories(dir);
      write_text(dir / "curve.csv", curve_csv(sr.curve));
      if (sr.ok) {
        const EnvSpec spec = make_env_spec(rc.env, rc.d);
        std::vector<int> aw{spec.state_dim}, cw{spec.action_dim + spec.state_dim};
        aw.insert(aw.end(), rc.hidden.begin(), rc.hidden.end());
        cw.insert(cw.end(), rc.hidden.begin(), rc.hidden.end());
        aw.push_back(spec.action_dim);
        cw.push_back(1);
        save_params_file((dir / "actor.bin").string(), Mlp(aw), theta);
        save_params_file((dir / "critic.bin").string(), Mlp(cw), nu);
      } else {
        log("seed " + std::to_string(seed) + " failed: " + sr.error);
      }
      result.seeds[i] = std::move(sr);
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(rc.seeds.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  nlohmann::ordered_json manifest;
  manifest["code_version"] = code_version();
  manifest["variant"] = rc.variant;
  nlohmann::ordered_json conf;
  for (const auto& [k, v] : resolved_entries(rc)) conf[k] = v;
  manifest["resolved_config"] = conf;
  nlohmann::ordered_json base;
  for (const auto& [k, v] : config_entries(cfg)) base[k] = v;
  manifest["base_config"] = base;
  manifest["seeds"] = nlohmann::ordered_json::array();
  for (const auto& sr : result.seeds) {
    nlohmann::ordered_json s;
    s["seed"] = sr.seed;
    s["status"] = sr.ok ? "ok" : "failed";
    if (!sr.ok) s["error"] = sr.error;
    s["curve"] = "seed_" + std::to_string(sr.seed) + "/curve.csv";
    s["updates"] = sr.updates;
    s["aborted_updates"] = sr.aborted_updates;
    s["skipped_adam_steps"] = sr.skipped_adam_steps;
    manifest["seeds"].push_back(s);
  }
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

CompareReport compare(const std::vector<std::string>& run_dirs) {
  CompareReport report;
  for (const auto& d : run_dirs) {
    const fs::path dir(d);
    nlohmann::json manifest;
    try {
      std::ifstream is(dir / "manifest.json");
      if (!is) throw std::runtime_error("missing manifest.json");
      manifest = nlohmann::json::parse(is);
    } catch (const std::exception& e) {
      report.problems.push_back(d + ": " + e.what());
      continue;
    }
    SummaryRow row;
    row.dir = d;
    std::vector<double> finals;
    try {
      const auto& conf = manifest.at("resolved_config");
      row.env = conf.at("env").get<std::string>();
      row.d = std::stoi(conf.at("d").get<std::string>());
      row.variant = manifest.at("variant").get<std::string>();
      for (const auto& s : manifest.at("seeds")) {
        if (s.at("status") != "ok") {
          report.problems.push_back(d + ": seed " + s.at("seed").dump() + " failed, excluded");
          continue;
        }
        try {
          finals.push_back(final_window_mean(read_curve_csv((dir / s.at("curve").get<std::string>()).string())));
        } catch (const std::exception& e) {
          report.problems.push_back(std::string(e.what()) + ", excluded");
        }
      }
    } catch (const std::exception& e) {
      report.problems.push_back(d + ": corrupt manifest.json (" + e.what() + ")");
      continue;
    }
    if (finals.empty()) {
      report.problems.push_back(d + ": no usable seeds");
      continue;
    }
    row.seeds = static_cast<int>(finals.size());
    double s = 0.0;
    for (double f : finals) s += f;
    row.final_mean = s / finals.size();
    double ss = 0.0;
    for (double f : finals) ss += (f - row.final_mean) * (f - row.final_mean);
    row.final_std = std::sqrt(ss / finals.size());
    report.rows.push_back(row);
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    if (a.env != b.env) return a.env < b.env;
    if (a.d != b.d) return a.d < b.d;
    return a.final_mean > b.final_mean;
  });
  return report;
}

std::string format_report(const CompareReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %4s %-12s %5s %14s %12s  %s\n", "env", "d", "variant",
                "seeds", "final_mean", "final_std", "dir");
  os << line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-12s %4d %-12s %5d %14.3f %12.3f  %s\n", r.env.c_str(), r.d,
                  r.variant.c_str(), r.seeds, r.final_mean, r.final_std, r.dir.c_str());
    os << line;
  }
  for (const auto& p : report.problems) os << "warning: " << p << "\n";
  return os.str();
}

std::string report_csv(const CompareReport& report) {
  std::string s = "env,d,variant,seeds,final_mean,final_std,dir\n";
  for (const auto& r : report.rows) {
    s += r.env + "," + std::to_string(r.d) + "," + r.variant + "," + std::to_string(r.seeds) + "," +
         format_double(r.final_mean) + "," + format_double(r.final_std) + "," + r.dir + "\n";
  }
  return s;
}

}  // namespace acerac
