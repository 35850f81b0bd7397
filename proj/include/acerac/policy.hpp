#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "acerac/ar_process.hpp"
#include "acerac/kron_gauss.hpp"
#include "acerac/mlp.hpp"

namespace acerac {

/// Per-dimension box bounds on actions.
struct ActionBounds {
  VectorXd low;
  VectorXd high;

  static ActionBounds symmetric(Eigen::Index dim, double limit);
  VectorXd clamp(const VectorXd& a) const;
  Eigen::Index dim() const { return low.size(); }
};

struct PolicyOutput {
  VectorXd action;      // clipped, sent to the environment
  VectorXd raw_action;  // mean + xi, stored in replay
  VectorXd mean;        // A(s; theta) at execution time
};

/// n consecutive steps of one episode, as replayed by the trainer.
struct SequenceWindow {
  std::vector<VectorXd> states;   // s_j .. s_{j+n-1}
  std::vector<VectorXd> actions;  // raw a_j .. a_{j+n-1}
  std::vector<double> rewards;    // r_j .. r_{j+n-1}
  double behavior_log_density = 0.0;
  VectorXd next_state;            // s_{j+n}
  bool start_of_episode = false;
  bool terminal = false;          // s_{j+n} is absorbing
  std::int64_t j_offset = 0;      // position of j inside its episode
  VectorXd prev_state;            // s_{j-1}; empty when start_of_episode
  VectorXd prev_action;           // raw a_{j-1}; empty when start_of_episode

  int n() const { return static_cast<int>(states.size()); }
};

/// Window log-density together with its gradient w.r.t. actor outputs.
/// Columns of mean_cotangent follow window_actor_inputs():
///   0 -> A(s_{j-1}),  1..n -> A(s_{j+k}),  n+1 -> A(s_{j+n}).
struct WindowDensityTerms {
  double log_density = 0.0;
  MatrixXd mean_cotangent;
};

/// The neural-AR policy a_t = A(s_t; theta) + xi_t with xi an AR(1) process.
class NeuralArPolicy {
 public:
  NeuralArPolicy(Mlp actor, int n, double alpha, CovKernel kernel, ActionBounds bounds);

  const Mlp& actor() const { return actor_; }
  int n() const { return n_; }
  double alpha() const { return alpha_; }
  const CovKernel& kernel() const { return kernel_; }
  const ActionBounds& bounds() const { return bounds_; }
  Eigen::Index action_dim() const { return kernel_.dim(); }
  const KroneckerGaussian& stationary() const { return stationary_; }
  const KroneckerGaussian& conditional() const { return conditional_; }

  VectorXd mean_action(const VectorXd& theta, const VectorXd& s) const;

  /// Throws std::runtime_error on a non-finite actor output.
  PolicyOutput act(const VectorXd& theta, const VectorXd& s, const ArNoise& noise) const;

  /// xi_{t-1}(theta) = a_{t-1} - A(s_{t-1}; theta).
  VectorXd retrieve_noise(const VectorXd& theta, const VectorXd& prev_s,
                          const VectorXd& prev_a) const;
  /// Episode-initial variant: alpha^-1 (a_t - A(s_t; theta)). Requires alpha > 0.
  VectorXd retrieve_noise_initial(const VectorXd& theta, const VectorXd& s,
                                  const VectorXd& a) const;

  /// u = A(s; theta) + alpha xi, the expected next action.
  VectorXd adjusted_noise(const VectorXd& theta, const VectorXd& s, const VectorXd& xi) const;
  /// Inverse map xi = alpha^-1 (u - A(s; theta)). Requires alpha > 0.
  VectorXd noise_from_adjusted(const VectorXd& theta, const VectorXd& s,
                               const VectorXd& u) const;

  /// ln p(xi_t | xi_{t-1}): N(alpha xi_{t-1}, (1 - alpha^2) C), or N(0, C)
  /// when prev_xi is empty (first step of an episode). Summing these over a
  /// window gives the window density by the chain rule.
  double step_log_density(const std::optional<VectorXd>& prev_xi, const VectorXd& xi) const;

  /// Window density with an explicit preceding noise value (nullopt marks an
  /// episode-initial window):
  ///   mid-episode  ln phi(a; A_bar + B xi_prev, Lambda1 (x) C)
  ///   initial      ln phi(a; A_bar, Lambda0 (x) C)
  double seq_log_density(const VectorXd& theta, const SequenceWindow& w,
                         const std::optional<VectorXd>& prev_xi) const;

  /// As above with xi_{j-1} retrieved from the window under theta.
  double seq_log_density(const VectorXd& theta, const SequenceWindow& w) const;

  /// Total gradient over theta of seq_log_density(theta, w), including the
  /// dependence of the retrieved xi_{j-1}(theta) on A(s_{j-1}; theta).
  VectorXd seq_log_density_grad(const VectorXd& theta, const SequenceWindow& w) const;

  /// Actor inputs for a window, one per column (see WindowDensityTerms).
  /// Column 0 duplicates s_j for episode-initial windows.
  MatrixXd window_actor_inputs(const SequenceWindow& w) const;

  /// Density terms from precomputed actor outputs (columns as above).
  WindowDensityTerms window_density_terms(const SequenceWindow& w,
                                          const Eigen::Ref<const MatrixXd>& actor_out) const;

 private:
  void check_window(const SequenceWindow& w) const;

  Mlp actor_;
  int n_;
  double alpha_;
  CovKernel kernel_;
  ActionBounds bounds_;
  KroneckerGaussian stationary_;
  KroneckerGaussian conditional_;
  KroneckerGaussian step_initial_;
  KroneckerGaussian step_conditional_;
};

}  // namespace acerac
