#include <doctest.h>

#include <cmath>

#include "acerac/ar_process.hpp"

using namespace acerac;

TEST_CASE("stationary marginal and lag-one covariance") {
  MatrixXd C(2, 2);
  C << 0.5, 0.1, 0.1, 0.2;
  const double alpha = 0.7;
  ArNoise noise(alpha, CovKernel(C));
  Rng rng(21);
  noise.reset(rng);
  const int N = 300000;
  MatrixXd v = MatrixXd::Zero(2, 2), lag1 = MatrixXd::Zero(2, 2);
  VectorXd prev = noise.xi();
  for (int t = 0; t < N; ++t) {
    noise.step(rng);
    v += noise.xi() * noise.xi().transpose();
    lag1 += noise.xi() * prev.transpose();
    prev = noise.xi();
  }
  v /= N;
  lag1 /= N;
  CHECK((v - C).cwiseAbs().maxCoeff() < 0.02);
  CHECK((lag1 - alpha * C).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("reset draws from N(0, C) and clears history") {
  ArNoise noise(0.9, CovKernel::isotropic(1, 2.0));
  Rng rng(22);
  CHECK(noise.fresh());
  double s2 = 0;
  const int N = 50000;
  for (int i = 0; i < N; ++i) {
    noise.reset(rng);
    s2 += noise.xi()[0] * noise.xi()[0];
  }
  CHECK(s2 / N == doctest::Approx(4.0).epsilon(0.03));
  noise.step(rng);
  CHECK_FALSE(noise.fresh());
}

TEST_CASE("alpha zero gives white noise") {
  ArNoise noise(0.0, CovKernel::isotropic(1, 1.0));
  Rng rng(23);
  noise.reset(rng);
  double lag = 0, prev = noise.xi()[0];
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    noise.step(rng);
    lag += prev * noise.xi()[0];
    prev = noise.xi()[0];
  }
  CHECK(std::abs(lag / N) < 4.0 / std::sqrt(N));
}

TEST_CASE("zero sigma gives zero noise") {
  ArNoise noise(0.5, CovKernel::isotropic(3, 0.0));
  Rng rng(24);
  noise.reset(rng);
  for (int i = 0; i < 10; ++i) noise.step(rng);
  CHECK(noise.xi().isZero(0.0));
}

TEST_CASE("default alpha halves per unit of base time") {
  CHECK(default_alpha(1) == 0.5);
  CHECK(std::pow(default_alpha(10), 10) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS(default_alpha(0));
  CHECK_THROWS(ArNoise(1.0, CovKernel::isotropic(1, 1.0)));
}
