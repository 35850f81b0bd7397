#include <doctest.h>

#include "acerac/policy.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

using namespace acerac;

namespace {

NeuralArPolicy make_policy(int n, double alpha, int sdim = 3, int adim = 2, double sigma = 0.4) {
  return NeuralArPolicy(Mlp({sdim, 6, adim}), n, alpha, CovKernel::isotropic(adim, sigma),
                        ActionBounds::symmetric(adim, 1.0));
}

}  // namespace

TEST_CASE("act adds the noise and clips only the executed copy") {
  const auto pol = make_policy(2, 0.5);
  Rng rng(41);
  const VectorXd theta = pol.actor().init_params(rng);
  ArNoise noise(0.5, CovKernel::isotropic(2, 5.0));
  noise.reset(rng);
  const VectorXd s = rng.normal_vector(3);
  const PolicyOutput out = pol.act(theta, s, noise);
  CHECK((out.raw_action - out.mean - noise.xi()).norm() == 0.0);
  CHECK((out.action - out.raw_action.cwiseMax(-1.0).cwiseMin(1.0)).norm() == 0.0);
  CHECK((out.mean - pol.mean_action(theta, s)).norm() == 0.0);
}

TEST_CASE("noise retrieval and adjusted noise invert each other") {
  const auto pol = make_policy(2, 0.6);
  Rng rng(42);
  const VectorXd theta = pol.actor().init_params(rng);
  const VectorXd s = rng.normal_vector(3), xi = rng.normal_vector(2);
  const VectorXd a = pol.mean_action(theta, s) + xi;
  CHECK((pol.retrieve_noise(theta, s, a) - xi).norm() < 1e-14);
  CHECK((pol.retrieve_noise_initial(theta, s, a) - xi / 0.6).norm() < 1e-14);
  const VectorXd u = pol.adjusted_noise(theta, s, xi);
  CHECK((u - (pol.mean_action(theta, s) + 0.6 * xi)).norm() < 1e-14);
  CHECK((pol.noise_from_adjusted(theta, s, u) - xi).norm() < 1e-14);

  const auto white = make_policy(1, 0.0);
  CHECK_THROWS_AS(white.retrieve_noise_initial(theta, s, a), std::domain_error);
  CHECK_THROWS_AS(white.noise_from_adjusted(theta, s, a), std::domain_error);
}

TEST_CASE("per-step densities chain to the window density") {
  Rng rng(43);
  for (double alpha : {0.0, 0.4, 0.9}) {
    for (int n : {1, 3, 6}) {
      const auto pol = make_policy(n, alpha);
      const VectorXd theta = pol.actor().init_params(rng);
      for (bool start : {true, false}) {
        const SequenceWindow w = fixture::random_window(rng, n, 3, 2, start, false);
        std::optional<VectorXd> prev;
        if (!start) prev = w.prev_action - pol.mean_action(theta, w.prev_state);
        double sum = 0.0;
        std::optional<VectorXd> p = prev;
        for (int k = 0; k < n; ++k) {
          const VectorXd xi = w.actions[k] - pol.mean_action(theta, w.states[k]);
          sum += pol.step_log_density(p, xi);
          p = xi;
        }
        CHECK(sum == doctest::Approx(pol.seq_log_density(theta, w, prev)).epsilon(1e-11));
        CHECK(sum == doctest::Approx(pol.seq_log_density(theta, w)).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("window density equals the dense propagated oracle") {
  Rng rng(44);
  const int n = 4;
  const double alpha = 0.7;
  const auto pol = make_policy(n, alpha);
  const VectorXd theta = pol.actor().init_params(rng);
  const MatrixXd C = pol.kernel().cov();
  for (bool start : {true, false}) {
    const SequenceWindow w = fixture::random_window(rng, n, 3, 2, start, false);
    VectorXd x(2 * n), mean(2 * n);
    VectorXd xi_prev = VectorXd::Zero(2);
    if (!start) xi_prev = w.prev_action - pol.mean_action(theta, w.prev_state);
    for (int k = 0; k < n; ++k) {
      x.segment(2 * k, 2) = w.actions[k];
      mean.segment(2 * k, 2) = pol.mean_action(theta, w.states[k]) + std::pow(alpha, k + 1) * xi_prev;
    }
    const double want = oracle::gauss_logpdf(x, mean, oracle::propagated_cov(n, alpha, C, !start));
    CHECK(pol.seq_log_density(theta, w) == doctest::Approx(want).epsilon(1e-11));
  }
}

TEST_CASE("total gradient of the window log density") {
  Rng rng(45);
  for (double alpha : {0.0, 0.5, 0.85}) {
    const auto pol = make_policy(3, alpha);
    const VectorXd theta = pol.actor().init_params(rng);
    for (bool start : {true, false}) {
      const SequenceWindow w = fixture::random_window(rng, 3, 3, 2, start, false, 0.5);
      const VectorXd g = pol.seq_log_density_grad(theta, w);
      const VectorXd fd = oracle::central_diff(
          [&](const VectorXd& q) { return pol.seq_log_density(q, w); }, theta, 1e-6);
      CHECK(oracle::rel_err(g, fd) < 1e-6);
    }
  }
}

TEST_CASE("malformed windows are rejected") {
  const auto pol = make_policy(3, 0.5);
  Rng rng(46);
  const VectorXd theta = pol.actor().init_params(rng);
  SequenceWindow w = fixture::random_window(rng, 2, 3, 2, true, false);
  CHECK_THROWS_AS(pol.seq_log_density(theta, w), std::invalid_argument);
  w = fixture::random_window(rng, 3, 3, 2, false, false);
  w.prev_action.resize(0);
  CHECK_THROWS_AS(pol.seq_log_density(theta, w), std::invalid_argument);
  CHECK_THROWS_AS(NeuralArPolicy(Mlp({3, 4, 1}), 2, 0.5, CovKernel::isotropic(2, 0.3),
                                 ActionBounds::symmetric(2, 1.0)),
                  std::invalid_argument);
}
