#include "acerac/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "acerac/ar_process.hpp"
#include "acerac/envs.hpp"

namespace acerac {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw std::invalid_argument("invalid config field '" + key + "': " + why);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T value{};
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (t.empty() || ec != std::errc() || ptr != last) bad(key, "cannot parse '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  bad(key, "expected a boolean, got '" + text + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, item));
  if (out.empty()) bad(key, "empty list");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  if (k == "env") c.env = trim(value);
  else if (k == "d") c.d = parse_number<int>(k, value);
  else if (k == "steps") c.steps = parse_number<std::int64_t>(k, value);
  else if (k == "eval_interval") c.eval_interval = parse_number<std::int64_t>(k, value);
  else if (k == "eval_episodes") c.eval_episodes = parse_number<int>(k, value);
  else if (k == "seeds") c.seeds = parse_list<std::uint64_t>(k, value);
  else if (k == "n") c.n = parse_number<int>(k, value);
  else if (k == "alpha") c.alpha = parse_number<double>(k, value);
  else if (k == "sigma") c.sigma = parse_number<double>(k, value);
  else if (k == "gamma") c.gamma = parse_number<double>(k, value);
  else if (k == "b") c.b = parse_number<double>(k, value);
  else if (k == "actor_lr") c.actor_lr = parse_number<double>(k, value);
  else if (k == "critic_lr") c.critic_lr = parse_number<double>(k, value);
  else if (k == "gradient_steps") c.gradient_steps = parse_number<int>(k, value);
  else if (k == "learning_start") c.learning_start = parse_number<std::int64_t>(k, value);
  else if (k == "penalty_weight") c.penalty_weight = parse_number<double>(k, value);
  else if (k == "minibatch") c.minibatch = parse_number<int>(k, value);
  else if (k == "capacity") c.capacity = parse_number<std::int64_t>(k, value);
  else if (k == "hidden") c.hidden = parse_list<int>(k, value);
  else if (k == "white_noise") c.white_noise = parse_bool(k, value);
  else if (k == "out") c.out = trim(value);
  else bad(k, "unknown key");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    set_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

ResolvedConfig resolve(const ExperimentConfig& c) {
  (void)make_env_spec(c.env, c.d);  // validates env and d
  if (c.steps < 0) bad("steps", "must be >= 0");
  if (c.eval_interval < 1) bad("eval_interval", "must be >= 1");
  if (c.eval_episodes < 1) bad("eval_episodes", "must be >= 1");
  if (c.seeds.empty()) bad("seeds", "need at least one seed");
  if (c.capacity < 1) bad("capacity", "must be positive");
  if (c.hidden.empty()) bad("hidden", "need at least one hidden layer");
  for (int w : c.hidden) {
    if (w < 1) bad("hidden", "widths must be positive");
  }
  if (!(c.alpha >= 0.0 && c.alpha < 1.0)) bad("alpha", "must lie in [0, 1)");
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) bad("gamma", "must lie in (0, 1)");

  ResolvedConfig r;
  const int d = c.d;
  r.env = c.env;
  r.d = d;
  r.variant = c.white_noise ? "white_noise" : "acerac";
  r.total_steps = c.steps * d;
  r.eval_interval = c.eval_interval * d;
  r.update_interval = d;
  r.eval_episodes = c.eval_episodes;
  r.capacity = static_cast<std::size_t>(c.capacity) * static_cast<std::size_t>(d);
  r.seeds = c.seeds;
  r.hidden = c.hidden;

  AlgoConfig& a = r.algo;
  a.n = c.white_noise ? 1 : c.n * d;
  a.alpha = c.white_noise ? 0.0 : (d == 1 ? c.alpha : std::pow(c.alpha, 1.0 / d));
  a.sigma = c.sigma;
  a.gamma = d == 1 ? c.gamma : std::pow(c.gamma, 1.0 / d);
  a.b = c.b;
  a.actor_step_size = c.actor_lr;
  a.critic_step_size = c.critic_lr;
  a.gradient_steps = c.gradient_steps;
  a.learning_start = c.learning_start * d;
  a.penalty_weight = c.penalty_weight;
  a.minibatch = c.minibatch;
  a.validate();
  if (r.capacity < static_cast<std::size_t>(a.n) + 2) bad("capacity", "must hold at least n + 2 steps");
  return r;
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
  return {
      {"env", c.env},
      {"d", std::to_string(c.d)},
      {"steps", std::to_string(c.steps)},
      {"eval_interval", std::to_string(c.eval_interval)},
      {"eval_episodes", std::to_string(c.eval_episodes)},
      {"seeds", join(c.seeds)},
      {"n", std::to_string(c.n)},
      {"alpha", format_double(c.alpha)},
      {"sigma", format_double(c.sigma)},
      {"gamma", format_double(c.gamma)},
      {"b", format_double(c.b)},
      {"actor_lr", format_double(c.actor_lr)},
      {"critic_lr", format_double(c.critic_lr)},
      {"gradient_steps", std::to_string(c.gradient_steps)},
      {"learning_start", std::to_string(c.learning_start)},
      {"penalty_weight", format_double(c.penalty_weight)},
      {"minibatch", std::to_string(c.minibatch)},
      {"capacity", std::to_string(c.capacity)},
      {"hidden", join(c.hidden)},
      {"white_noise", c.white_noise ? "true" : "false"},
      {"out", c.out},
  };
}

std::vector<std::pair<std::string, std::string>> resolved_entries(const ResolvedConfig& r) {
  const AlgoConfig& a = r.algo;
  return {
      {"env", r.env},
      {"d", std::to_string(r.d)},
      {"variant", r.variant},
      {"total_steps", std::to_string(r.total_steps)},
      {"eval_interval", std::to_string(r.eval_interval)},
      {"update_interval", std::to_string(r.update_interval)},
      {"eval_episodes", std::to_string(r.eval_episodes)},
      {"capacity", std::to_string(r.capacity)},
      {"seeds", join(r.seeds)},
      {"hidden", join(r.hidden)},
      {"n", std::to_string(a.n)},
      {"alpha", format_double(a.alpha)},
      {"sigma", format_double(a.sigma)},
      {"gamma", format_double(a.gamma)},
      {"b", format_double(a.b)},
      {"actor_lr", format_double(a.actor_step_size)},
      {"critic_lr", format_double(a.critic_step_size)},
      {"gradient_steps", std::to_string(a.gradient_steps)},
      {"learning_start", std::to_string(a.learning_start)},
      {"penalty_weight", format_double(a.penalty_weight)},
      {"minibatch", std::to_string(a.minibatch)},
  };
}

std::string format_entries(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string s;
  for (const auto& [k, v] : entries) s += k + " = " + v + "\n";
  return s;
}

}  // namespace acerac
