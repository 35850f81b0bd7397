#include "acerac/trainer.hpp"

#include <cmath>
#include <stdexcept>

namespace acerac {

void AlgoConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("invalid config field '" + field + "': " + why);
  };
  if (n < 1) fail("n", "must be >= 1");
  if (!(alpha >= 0.0 && alpha < kMaxAlpha)) fail("alpha", "must lie in [0, 1)");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) fail("sigma", "must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma", "must lie in (0, 1)");
  if (!(b > 1.0) || !std::isfinite(b)) fail("b", "must be > 1");
  if (!(actor_step_size > 0.0)) fail("actor_lr", "must be positive");
  if (!(critic_step_size > 0.0)) fail("critic_lr", "must be positive");
  if (gradient_steps < 1) fail("gradient_steps", "must be >= 1");
  if (learning_start < 0) fail("learning_start", "must be >= 0");
  if (!(penalty_weight >= 0.0)) fail("penalty_weight", "must be >= 0");
  if (minibatch < 1) fail("minibatch", "must be >= 1");
}

double soft_truncate(double x, double b) {
  if (!(b > 1.0)) throw std::invalid_argument("soft_truncate: b must be > 1");
  return b * std::tanh(x / b);
}

Acerac::Acerac(NeuralArPolicy policy, Mlp critic, AlgoConfig cfg)
    : policy_(std::move(policy)), critic_(std::move(critic)), cfg_(cfg) {
  cfg_.validate();
  if (policy_.n() != cfg_.n || policy_.alpha() != cfg_.alpha) {
    throw std::invalid_argument("Acerac: policy window/alpha disagree with config");
  }
  const auto in = policy_.action_dim() + policy_.actor().input_dim();
  if (critic_.input_dim() != in || critic_.output_dim() != 1) {
    throw std::invalid_argument("Acerac: critic must map [u; s] to a scalar");
  }
  gamma_n_ = std::pow(cfg_.gamma, cfg_.n);
}

VectorXd Acerac::critic_input(const VectorXd& u, const VectorXd& s) const {
  VectorXd x(u.size() + s.size());
  x << u, s;
  return x;
}

double Acerac::penalty(const VectorXd& mean) const {
  const auto& bd = policy_.bounds();
  const VectorXd over = (mean - bd.high).cwiseMax(0.0) + (bd.low - mean).cwiseMax(0.0);
  return cfg_.penalty_weight * over.squaredNorm();
}

VectorXd Acerac::penalty_grad(const VectorXd& mean) const {
  const auto& bd = policy_.bounds();
  return 2.0 * cfg_.penalty_weight *
         ((mean - bd.high).cwiseMax(0.0) - (bd.low - mean).cwiseMax(0.0));
}

BatchEvaluation Acerac::evaluate(std::span<const SequenceWindow> batch, const VectorXd& theta,
                                 const VectorXd& nu) const {
  const int n = cfg_.n;
  const double alpha = cfg_.alpha;
  const Eigen::Index cols = n + 2;
  const auto count = static_cast<Eigen::Index>(batch.size());
  if (count == 0) throw std::invalid_argument("Acerac::evaluate: empty batch");
  const Eigen::Index adim = policy_.action_dim();
  const Eigen::Index sdim = policy_.actor().input_dim();
  const Mlp& actor = policy_.actor();

  MatrixXd actor_in(sdim, count * cols);
  for (Eigen::Index b = 0; b < count; ++b) {
    actor_in.middleCols(b * cols, cols) = policy_.window_actor_inputs(batch[b]);
  }
  Mlp::Trace actor_trace;
  const MatrixXd aout = actor.forward_batch(theta, actor_in, actor_trace);

  // Adjusted noises u_{j-1}(theta) and u_{j+n-1}(theta) paired with s_j and s_{j+n}.
  MatrixXd prev_in(adim + sdim, count);
  MatrixXd next_in(adim + sdim, count);
  for (Eigen::Index b = 0; b < count; ++b) {
    const SequenceWindow& w = batch[b];
    const auto a = aout.middleCols(b * cols, cols);
    VectorXd u_prev;
    if (w.start_of_episode) {
      // Episode-initial: u_{j-1} = a_j; with alpha = 0 this degenerates to A(s_j).
      u_prev = alpha > 0.0 ? w.actions.front() : VectorXd(a.col(1));
    } else {
      u_prev = a.col(1) + alpha * (w.prev_action - a.col(0));
    }
    const VectorXd u_next = a.col(n + 1) + alpha * (w.actions.back() - a.col(n));
    prev_in.col(b) << u_prev, w.states.front();
    next_in.col(b) << u_next, w.next_state;
  }
  Mlp::Trace prev_trace, next_trace;
  const MatrixXd w_prev = critic_.forward_batch(nu, prev_in, prev_trace);
  const MatrixXd w_next = critic_.forward_batch(nu, next_in, next_trace);

  BatchEvaluation ev;
  ev.td.resize(count);
  ev.rho.resize(count);
  ev.raw_ratio.resize(count);
  ev.log_density.resize(count);
  ev.critic_value.resize(count);
  MatrixXd actor_cot = MatrixXd::Zero(adim, count * cols);
  MatrixXd prev_cot(1, count);
  MatrixXd next_cot(1, count);
  for (Eigen::Index b = 0; b < count; ++b) {
    const SequenceWindow& w = batch[b];
    double ret = 0.0;
    double disc = 1.0;
    for (double r : w.rewards) {
      ret += disc * r;
      disc *= cfg_.gamma;
    }
    const double boot = w.terminal ? 0.0 : gamma_n_ * w_next(0, b);
    const double td = ret + boot - w_prev(0, b);

    const auto a = aout.middleCols(b * cols, cols);
    const WindowDensityTerms terms = policy_.window_density_terms(w, a);
    const double raw = std::exp(terms.log_density - w.behavior_log_density);
    const double rho = soft_truncate(raw, cfg_.b);

    actor_cot.middleCols(b * cols, cols) = (td * rho) * terms.mean_cotangent;
    actor_cot.col(b * cols + 1) -= penalty_grad(a.col(1));
    prev_cot(0, b) = td * rho;
    next_cot(0, b) = w.terminal ? 0.0 : gamma_n_ * rho;

    ev.td[b] = td;
    ev.rho[b] = rho;
    ev.raw_ratio[b] = raw;
    ev.log_density[b] = terms.log_density;
    ev.critic_value[b] = w_prev(0, b);
  }

  // Chain dW/du through u_{j+n-1} = A(s_{j+n}) + alpha (a_{j+n-1} - A(s_{j+n-1})).
  const MatrixXd grad_u = critic_.grad_wrt_input(nu, next_trace, next_cot).topRows(adim);
  for (Eigen::Index b = 0; b < count; ++b) {
    actor_cot.col(b * cols + n + 1) += grad_u.col(b);
    actor_cot.col(b * cols + n) -= alpha * grad_u.col(b);
  }

  const double scale = 1.0 / static_cast<double>(count);
  ev.actor_direction = scale * actor.vjp(theta, actor_trace, actor_cot);
  ev.critic_direction = scale * critic_.vjp(nu, prev_trace, prev_cot);
  return ev;
}

double Acerac::temporal_difference(const SequenceWindow& w, const VectorXd& theta,
                                   const VectorXd& nu) const {
  return evaluate({&w, 1}, theta, nu).td[0];
}

Acerac::Ratio Acerac::density_ratio(const SequenceWindow& w, const VectorXd& theta) const {
  const MatrixXd out = policy_.actor().forward_batch(theta, policy_.window_actor_inputs(w));
  const double lp = policy_.window_density_terms(w, out).log_density;
  const double raw = std::exp(lp - w.behavior_log_density);
  return {soft_truncate(raw, cfg_.b), raw};
}

VectorXd Acerac::actor_direction(const SequenceWindow& w, const VectorXd& theta,
                                 const VectorXd& nu) const {
  return evaluate({&w, 1}, theta, nu).actor_direction;
}

VectorXd Acerac::critic_direction(const SequenceWindow& w, const VectorXd& theta,
                                  const VectorXd& nu) const {
  return evaluate({&w, 1}, theta, nu).critic_direction;
}

UpdateDiagnostics Acerac::train_step(const ReplayBuffer& buffer, VectorXd& theta, VectorXd& nu,
                                     AdamState& actor_opt, AdamState& critic_opt,
                                     Rng& rng) const {
  UpdateDiagnostics diag;
  if (!buffer.ready()) return diag;
  diag.ready = true;
  std::vector<SequenceWindow> batch(static_cast<std::size_t>(cfg_.minibatch));
  for (int step = 0; step < cfg_.gradient_steps; ++step) {
    for (auto& w : batch) w = *buffer.sample_window(rng);
    const BatchEvaluation ev = evaluate(batch, theta, nu);
    if (!ev.actor_direction.allFinite() || !ev.critic_direction.allFinite()) {
      ++diag.aborted;
      continue;
    }
    adam_step(theta, ev.actor_direction, actor_opt, StepSense::Ascend);
    adam_step(nu, ev.critic_direction, critic_opt, StepSense::Ascend);
    ++diag.updates;

    const double inv = 1.0 / static_cast<double>(batch.size());
    diag.td = diag.rho = diag.raw_ratio = diag.critic_value = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      diag.td += inv * ev.td[i];
      diag.rho += inv * ev.rho[i];
      diag.raw_ratio += inv * ev.raw_ratio[i];
      diag.critic_value += inv * ev.critic_value[i];
    }
    diag.actor_grad_norm = ev.actor_direction.norm();
    diag.critic_grad_norm = ev.critic_direction.norm();
  }
  return diag;
}

}  // namespace acerac
