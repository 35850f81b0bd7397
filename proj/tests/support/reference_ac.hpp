#pragma once

// Independent one-step Gaussian actor-critic: a ~ N(A(s), C), critic V(s) =
// W([A(s); s]). This is what the autocorrelated update must reduce to when
// alpha = 0 and n = 1.

#include <cmath>
#include <vector>

#include "acerac/policy.hpp"
#include "oracles.hpp"

namespace oracle {

struct OneStepAC {
  RefMlp actor;
  RefMlp critic;
  MatrixXd C;
  double gamma;
  double b;
  VectorXd low, high;
  double penalty_weight;

  struct Out {
    VectorXd actor_dir;
    VectorXd critic_dir;
    std::vector<double> td, rho;
  };

  VectorXd joined(const VectorXd& u, const VectorXd& s) const {
    VectorXd x(u.size() + s.size());
    x << u, s;
    return x;
  }

  Out directions(const std::vector<acerac::SequenceWindow>& batch, const VectorXd& theta,
                 const VectorXd& nu) const {
    Out out{VectorXd::Zero(theta.size()), VectorXd::Zero(nu.size()), {}, {}};
    const MatrixXd Cinv = C.inverse();
    for (const auto& w : batch) {
      const VectorXd& s = w.states[0];
      const VectorXd& a = w.actions[0];
      const VectorXd& s1 = w.next_state;
      const VectorXd m = actor.forward(theta, s);
      const VectorXd m1 = actor.forward(theta, s1);
      const VectorXd x0 = joined(m, s), x1 = joined(m1, s1);
      const double v0 = critic.forward(nu, x0)[0];
      const double v1 = critic.forward(nu, x1)[0];
      const double td = w.rewards[0] + (w.terminal ? 0.0 : gamma * v1) - v0;
      const double lp = gauss_logpdf(a, m, C);
      const double rho = b * std::tanh(std::exp(lp - w.behavior_log_density) / b);

      VectorXd score_cot = Cinv * (a - m) * (td * rho);
      VectorXd pen(m.size());
      for (Eigen::Index k = 0; k < m.size(); ++k) {
        const double over = std::max(0.0, m[k] - high[k]) - std::max(0.0, low[k] - m[k]);
        pen[k] = 2.0 * penalty_weight * over;
      }
      out.actor_dir += actor.vjp(theta, s, score_cot - pen);
      if (!w.terminal) {
        VectorXd dx;
        critic.vjp(nu, x1, VectorXd::Constant(1, gamma * rho), &dx);
        out.actor_dir += actor.vjp(theta, s1, dx.head(m.size()));
      }
      out.critic_dir += critic.vjp(nu, x0, VectorXd::Constant(1, td * rho));
      out.td.push_back(td);
      out.rho.push_back(rho);
    }
    out.actor_dir /= static_cast<double>(batch.size());
    out.critic_dir /= static_cast<double>(batch.size());
    return out;
  }
};

}  // namespace oracle
