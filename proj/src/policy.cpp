#include "acerac/policy.hpp"

#include <stdexcept>
#include <string>

namespace acerac {

ActionBounds ActionBounds::symmetric(Eigen::Index dim, double limit) {
  return {VectorXd::Constant(dim, -limit), VectorXd::Constant(dim, limit)};
}

VectorXd ActionBounds::clamp(const VectorXd& a) const {
  return a.cwiseMax(low).cwiseMin(high);
}

NeuralArPolicy::NeuralArPolicy(Mlp actor, int n, double alpha, CovKernel kernel,
                               ActionBounds bounds)
    : actor_(std::move(actor)),
      n_(n),
      alpha_(alpha),
      kernel_(kernel),
      bounds_(std::move(bounds)),
      stationary_(LagMatrix(LagKind::Stationary, n, alpha), kernel),
      conditional_(LagMatrix(LagKind::Conditional, n, alpha), kernel),
      step_initial_(LagMatrix(LagKind::Stationary, 1, alpha), kernel),
      step_conditional_(LagMatrix(LagKind::Conditional, 1, alpha), kernel) {
  if (actor_.output_dim() != kernel_.dim()) {
    throw std::invalid_argument("NeuralArPolicy: actor output width differs from noise dimension");
  }
  if (bounds_.low.size() != kernel_.dim() || bounds_.high.size() != kernel_.dim()) {
    throw std::invalid_argument("NeuralArPolicy: action bounds have the wrong dimension");
  }
}

VectorXd NeuralArPolicy::mean_action(const VectorXd& theta, const VectorXd& s) const {
  return actor_.forward(theta, s);
}

PolicyOutput NeuralArPolicy::act(const VectorXd& theta, const VectorXd& s,
                                 const ArNoise& noise) const {
  PolicyOutput out;
  out.mean = mean_action(theta, s);
  if (!out.mean.allFinite()) throw std::runtime_error("NeuralArPolicy::act: non-finite actor output");
  out.raw_action = out.mean + noise.xi();
  out.action = bounds_.clamp(out.raw_action);
  return out;
}

VectorXd NeuralArPolicy::retrieve_noise(const VectorXd& theta, const VectorXd& prev_s,
                                        const VectorXd& prev_a) const {
  return prev_a - mean_action(theta, prev_s);
}

VectorXd NeuralArPolicy::retrieve_noise_initial(const VectorXd& theta, const VectorXd& s,
                                                const VectorXd& a) const {
  if (alpha_ <= 0.0) {
    throw std::domain_error("retrieve_noise_initial: undefined for alpha = 0");
  }
  return (a - mean_action(theta, s)) / alpha_;
}

VectorXd NeuralArPolicy::adjusted_noise(const VectorXd& theta, const VectorXd& s,
                                        const VectorXd& xi) const {
  return mean_action(theta, s) + alpha_ * xi;
}

VectorXd NeuralArPolicy::noise_from_adjusted(const VectorXd& theta, const VectorXd& s,
                                             const VectorXd& u) const {
  if (alpha_ <= 0.0) throw std::domain_error("noise_from_adjusted: undefined for alpha = 0");
  return (u - mean_action(theta, s)) / alpha_;
}

double NeuralArPolicy::step_log_density(const std::optional<VectorXd>& prev_xi,
                                        const VectorXd& xi) const {
  if (!prev_xi) return step_initial_.log_density(xi, VectorXd::Zero(xi.size()));
  return step_conditional_.log_density(xi, alpha_ * *prev_xi);
}

void NeuralArPolicy::check_window(const SequenceWindow& w) const {
  if (w.n() != n_ || static_cast<int>(w.actions.size()) != n_) {
    throw std::invalid_argument("SequenceWindow has length " + std::to_string(w.n()) +
                                ", policy expects " + std::to_string(n_));
  }
  if (!w.start_of_episode && (w.prev_state.size() == 0 || w.prev_action.size() == 0)) {
    throw std::invalid_argument("SequenceWindow: mid-episode window lacks its preceding step");
  }
}

MatrixXd NeuralArPolicy::window_actor_inputs(const SequenceWindow& w) const {
  check_window(w);
  const Eigen::Index sd = w.states.front().size();
  MatrixXd x(sd, n_ + 2);
  x.col(0) = w.start_of_episode ? w.states.front() : w.prev_state;
  for (int k = 0; k < n_; ++k) x.col(k + 1) = w.states[k];
  x.col(n_ + 1) = w.next_state.size() ? w.next_state : w.states.back();
  return x;
}

namespace {

VectorXd stack(const std::vector<VectorXd>& blocks) {
  const Eigen::Index d = blocks.front().size();
  VectorXd out(d * static_cast<Eigen::Index>(blocks.size()));
  for (std::size_t k = 0; k < blocks.size(); ++k) out.segment(k * d, d) = blocks[k];
  return out;
}

}  // namespace

WindowDensityTerms NeuralArPolicy::window_density_terms(
    const SequenceWindow& w, const Eigen::Ref<const MatrixXd>& actor_out) const {
  check_window(w);
  const Eigen::Index dim = action_dim();
  if (actor_out.rows() != dim || actor_out.cols() != n_ + 2) {
    throw std::invalid_argument("window_density_terms: actor output block has the wrong shape");
  }
  const VectorXd x = stack(w.actions);
  VectorXd mean(x.size());
  for (int k = 0; k < n_; ++k) mean.segment(k * dim, dim) = actor_out.col(k + 1);

  WindowDensityTerms out;
  out.mean_cotangent = MatrixXd::Zero(dim, n_ + 2);
  if (w.start_of_episode) {
    out.log_density = stationary_.log_density(x, mean);
    const VectorXd g = stationary_.grad_log_density_wrt_mean(x, mean);
    for (int k = 0; k < n_; ++k) out.mean_cotangent.col(k + 1) = g.segment(k * dim, dim);
    return out;
  }

  const VectorXd xi_prev = w.prev_action - actor_out.col(0);
  double p = alpha_;
  for (int k = 0; k < n_; ++k) {
    mean.segment(k * dim, dim) += p * xi_prev;
    p *= alpha_;
  }
  out.log_density = conditional_.log_density(x, mean);
  const VectorXd g = conditional_.grad_log_density_wrt_mean(x, mean);
  // mean_k = A(s_{j+k}) + alpha^{k+1} (a_{j-1} - A(s_{j-1}))
  p = alpha_;
  for (int k = 0; k < n_; ++k) {
    const auto gk = g.segment(k * dim, dim);
    out.mean_cotangent.col(k + 1) = gk;
    out.mean_cotangent.col(0) -= p * gk;
    p *= alpha_;
  }
  return out;
}

double NeuralArPolicy::seq_log_density(const VectorXd& theta, const SequenceWindow& w,
                                       const std::optional<VectorXd>& prev_xi) const {
  check_window(w);
  const Eigen::Index dim = action_dim();
  MatrixXd inputs(w.states.front().size(), n_);
  for (int k = 0; k < n_; ++k) inputs.col(k) = w.states[k];
  const MatrixXd a_bar = actor_.forward_batch(theta, inputs);
  const VectorXd x = stack(w.actions);
  VectorXd mean(x.size());
  for (int k = 0; k < n_; ++k) mean.segment(k * dim, dim) = a_bar.col(k);
  if (!prev_xi) return stationary_.log_density(x, mean);
  if (prev_xi->size() != dim) throw DimensionMismatch("seq_log_density: xi_prev has wrong length");
  double p = alpha_;
  for (int k = 0; k < n_; ++k) {
    mean.segment(k * dim, dim) += p * *prev_xi;
    p *= alpha_;
  }
  return conditional_.log_density(x, mean);
}

double NeuralArPolicy::seq_log_density(const VectorXd& theta, const SequenceWindow& w) const {
  const MatrixXd out = actor_.forward_batch(theta, window_actor_inputs(w));
  return window_density_terms(w, out).log_density;
}

VectorXd NeuralArPolicy::seq_log_density_grad(const VectorXd& theta,
                                              const SequenceWindow& w) const {
  Mlp::Trace trace;
  const MatrixXd out = actor_.forward_batch(theta, window_actor_inputs(w), trace);
  const WindowDensityTerms terms = window_density_terms(w, out);
  return actor_.vjp(theta, trace, terms.mean_cotangent);
}

}  // namespace acerac
