#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "acerac/adam.hpp"
#include "acerac/mlp.hpp"
#include "acerac/policy.hpp"
#include "acerac/replay.hpp"
#include "acerac/rng.hpp"

namespace acerac {

/// Algorithm hyperparameters, already resolved for the discretization in use.
struct AlgoConfig {
  int n = 2;
  double alpha = 0.5;
  double sigma = 0.3;
  double gamma = 0.99;
  double b = 2.0;  // soft truncation bound for density ratios
  double actor_step_size = 1e-5;
  double critic_step_size = 1e-4;
  int gradient_steps = 1;
  std::int64_t learning_start = 1000;
  double penalty_weight = 1.0;
  int minibatch = 32;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

/// b tanh(x / b): odd, monotone, slope one at zero, bounded by b.
double soft_truncate(double x, double b);

struct UpdateDiagnostics {
  bool ready = false;     // false: buffer had no servable window, nothing done
  int updates = 0;        // applied gradient steps
  int aborted = 0;        // steps skipped on non-finite values
  double td = 0.0;        // batch means of the last applied step
  double rho = 0.0;
  double raw_ratio = 0.0;
  double critic_value = 0.0;
  double actor_grad_norm = 0.0;
  double critic_grad_norm = 0.0;
};

/// Per-window quantities and the batch-averaged improvement directions.
struct BatchEvaluation {
  std::vector<double> td;
  std::vector<double> rho;
  std::vector<double> raw_ratio;
  std::vector<double> log_density;
  std::vector<double> critic_value;  // W(u_{j-1}(theta), s_j; nu)
  VectorXd actor_direction;
  VectorXd critic_direction;
};

/// The actor-critic update. Parameters theta (actor) and nu (critic) are
/// owned by the caller and passed explicitly.
class Acerac {
 public:
  Acerac(NeuralArPolicy policy, Mlp critic, AlgoConfig cfg);

  const NeuralArPolicy& policy() const { return policy_; }
  const Mlp& critic() const { return critic_; }
  const AlgoConfig& config() const { return cfg_; }

  /// sum_i gamma^i r_{j+i} + gamma^n W(u_{j+n-1}(theta), s_{j+n}) - W(u_{j-1}(theta), s_j),
  /// with the bootstrap term dropped for terminal windows.
  double temporal_difference(const SequenceWindow& w, const VectorXd& theta,
                             const VectorXd& nu) const;

  struct Ratio {
    double rho;
    double raw;
  };
  Ratio density_ratio(const SequenceWindow& w, const VectorXd& theta) const;

  /// grad ln pi * d * rho + gamma^n grad_theta W(u_{j+n-1}(theta), s_{j+n}) * rho - grad L(s_j).
  /// d and rho enter as fixed weights.
  VectorXd actor_direction(const SequenceWindow& w, const VectorXd& theta,
                           const VectorXd& nu) const;
  /// grad_nu W(u_{j-1}(theta), s_j; nu) * d * rho.
  VectorXd critic_direction(const SequenceWindow& w, const VectorXd& theta,
                            const VectorXd& nu) const;

  /// Evaluates a minibatch in one batched pass per network.
  BatchEvaluation evaluate(std::span<const SequenceWindow> batch, const VectorXd& theta,
                           const VectorXd& nu) const;

  /// gradient_steps times: sample a minibatch, ascend both directions with ADAM.
  UpdateDiagnostics train_step(const ReplayBuffer& buffer, VectorXd& theta, VectorXd& nu,
                               AdamState& actor_opt, AdamState& critic_opt, Rng& rng) const;

  /// penalty_weight * sum_k max(0, |A_k| - bound_k)^2 on the actor mean.
  double penalty(const VectorXd& mean) const;
  VectorXd penalty_grad(const VectorXd& mean) const;

  /// Critic input [u; s].
  VectorXd critic_input(const VectorXd& u, const VectorXd& s) const;

 private:
  NeuralArPolicy policy_;
  Mlp critic_;
  AlgoConfig cfg_;
  double gamma_n_;
};

}  // namespace acerac
