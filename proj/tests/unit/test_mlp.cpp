#include <doctest.h>

#include <sstream>

#include "acerac/mlp.hpp"
#include "../support/oracles.hpp"

using namespace acerac;

TEST_CASE("forward matches the loop reference") {
  Rng rng(31);
  for (const std::vector<int>& widths : {std::vector<int>{3, 1}, {3, 5, 2}, {4, 8, 6, 3}}) {
    const Mlp net(widths);
    const oracle::RefMlp ref{widths};
    REQUIRE(net.param_count() == ref.param_count());
    const VectorXd p = net.init_params(rng);
    for (int i = 0; i < 5; ++i) {
      const VectorXd x = rng.normal_vector(widths.front());
      CHECK((net.forward(p, x) - ref.forward(p, x)).norm() < 1e-13);
    }
    MatrixXd X(widths.front(), 7);
    for (int c = 0; c < 7; ++c) X.col(c) = rng.normal_vector(widths.front());
    const MatrixXd Y = net.forward_batch(p, X);
    for (int c = 0; c < 7; ++c) CHECK((Y.col(c) - ref.forward(p, X.col(c))).norm() < 1e-13);
  }
}

TEST_CASE("batched vjp and input gradient match the reference and finite differences") {
  Rng rng(32);
  const std::vector<int> widths{4, 7, 5, 2};
  const Mlp net(widths);
  const oracle::RefMlp ref{widths};
  const VectorXd p = net.init_params(rng);
  MatrixXd X(4, 3), V(2, 3);
  for (int c = 0; c < 3; ++c) {
    X.col(c) = rng.normal_vector(4);
    V.col(c) = rng.normal_vector(2);
  }
  Mlp::Trace tr;
  net.forward_batch(p, X, tr);
  const auto g = net.backward(p, tr, V, true);
  VectorXd want = VectorXd::Zero(p.size());
  for (int c = 0; c < 3; ++c) {
    VectorXd dx;
    want += ref.vjp(p, X.col(c), V.col(c), &dx);
    CHECK((g.input.col(c) - dx).norm() < 1e-12);
  }
  CHECK((g.params - want).norm() < 1e-12);

  auto f = [&](const VectorXd& q) {
    double s = 0;
    for (int c = 0; c < 3; ++c) s += V.col(c).dot(net.forward(q, X.col(c)));
    return s;
  };
  CHECK(oracle::rel_err(net.vjp(p, tr, V), oracle::central_diff(f, p, 1e-6)) < 1e-7);
}

TEST_CASE("stale traces are refused") {
  Rng rng(33);
  const Mlp net({2, 3, 1});
  VectorXd p = net.init_params(rng);
  Mlp::Trace tr;
  net.forward_batch(p, MatrixXd::Ones(2, 1), tr);
  p[0] += 1.0;
  CHECK_THROWS_AS(net.vjp(p, tr, MatrixXd::Ones(1, 1)), std::logic_error);
  CHECK_THROWS_AS(net.forward(VectorXd::Zero(3), VectorXd::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(net.forward(p, VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("checkpoint round trip is exact") {
  Rng rng(34);
  const Mlp net({3, 16, 16, 1});
  const VectorXd p = net.init_params(rng);
  std::stringstream ss;
  save_params(ss, net, p);
  const auto [net2, p2] = load_params(ss);
  CHECK(net2 == net);
  CHECK(p2 == p);
  // header: 8 magic + 4 activation + 4 count + 4 * 4 widths + 8 count, then payload
  CHECK(ss.str().size() == 8 + 4 + 4 + 16 + 8 + 8 * static_cast<std::size_t>(p.size()));
}

TEST_CASE("corrupt checkpoints are rejected") {
  Rng rng(35);
  const Mlp net({2, 2});
  const VectorXd p = net.init_params(rng);
  std::stringstream ss;
  save_params(ss, net, p);
  std::string bytes = ss.str();

  std::stringstream bad_magic(std::string("XXXXXXXX") + bytes.substr(8));
  CHECK_THROWS_AS(load_params(bad_magic), std::runtime_error);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_params(truncated), std::runtime_error);
  CHECK_THROWS_AS(load_params_file("/nonexistent/actor.bin"), std::runtime_error);
  CHECK_THROWS(save_params(ss, net, VectorXd::Zero(1)));
}
