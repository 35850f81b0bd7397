#include "acerac/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace acerac {

namespace {

constexpr double kGravity = 10.0;
constexpr double kMass = 1.0;
constexpr double kLength = 1.0;
constexpr double kMaxTorque = 2.0;
constexpr double kMaxSpeed = 8.0;

constexpr double kDrag = 0.5;
constexpr double kGoalRadius = 0.05;
constexpr double kGoalSpeed = 0.1;

double wrap_angle(double x) {
  return std::remainder(x, 2.0 * std::numbers::pi);
}

}  // namespace

std::vector<std::string> env_ids() { return {"pendulum", "point_mass"}; }

EnvSpec make_env_spec(const std::string& id, int d) {
  if (d < 1) throw std::invalid_argument("discretization factor d must be >= 1");
  if (id == "pendulum") {
    return {EnvId::Pendulum, id, 3, 1, ActionBounds::symmetric(1, kMaxTorque), 0.05, 200, d};
  }
  if (id == "point_mass") {
    return {EnvId::PointMass, id, 4, 2, ActionBounds::symmetric(2, 1.0), 0.05, 200, d};
  }
  throw std::invalid_argument("unknown environment id '" + id + "'");
}

EnvState Environment::reset(Rng& rng) const {
  EnvState s;
  switch (spec_.id) {
    case EnvId::Pendulum:
      s.q.resize(2);
      s.q[0] = rng.uniform(-std::numbers::pi, std::numbers::pi);
      s.q[1] = rng.uniform(-1.0, 1.0);
      break;
    case EnvId::PointMass:
      s.q = VectorXd::Zero(4);
      s.q[0] = rng.uniform(-1.0, 1.0);
      s.q[1] = rng.uniform(-1.0, 1.0);
      break;
  }
  return s;
}

StepResult Environment::step(const EnvState& state, const VectorXd& action) const {
  if (action.size() != spec_.action_dim) {
    throw std::invalid_argument("Environment::step: action has the wrong dimension");
  }
  const double dt = spec_.dt();
  StepResult r;
  r.next.t = state.t + 1;
  switch (spec_.id) {
    case EnvId::Pendulum: {
      const double th = state.q[0];
      const double om = state.q[1];
      const double u = action[0];
      const double cost = std::pow(wrap_angle(th), 2) + 0.1 * om * om + 0.001 * u * u;
      const double acc = 3.0 * kGravity / (2.0 * kLength) * std::sin(th) +
                         3.0 / (kMass * kLength * kLength) * u;
      const double om_next = std::clamp(om + acc * dt, -kMaxSpeed, kMaxSpeed);
      r.next.q.resize(2);
      r.next.q[0] = wrap_angle(th + om_next * dt);
      r.next.q[1] = om_next;
      r.reward = -cost * spec_.reward_scale();
      break;
    }
    case EnvId::PointMass: {
      const auto p = state.q.head<2>();
      const auto v = state.q.tail<2>();
      const double cost = p.squaredNorm() + 0.1 * v.squaredNorm() + 0.01 * action.squaredNorm();
      const Eigen::Vector2d v_next = v + (action - kDrag * v) * dt;
      r.next.q.resize(4);
      r.next.q.head<2>() = p + v_next * dt;
      r.next.q.tail<2>() = v_next;
      r.reward = -cost * spec_.reward_scale();
      r.terminal = r.next.q.head<2>().norm() < kGoalRadius && v_next.norm() < kGoalSpeed;
      break;
    }
  }
  if (!r.next.q.allFinite()) throw std::runtime_error("Environment::step: non-finite state");
  r.truncated = !r.terminal && r.next.t >= spec_.episode_length();
  return r;
}

VectorXd Environment::observe(const EnvState& state) const {
  switch (spec_.id) {
    case EnvId::Pendulum:
      return Eigen::Vector3d(std::cos(state.q[0]), std::sin(state.q[0]), state.q[1]);
    case EnvId::PointMass:
      return state.q;
  }
  return {};
}

double Environment::pendulum_energy(const VectorXd& q) {
  // Upright is angle 0, so potential is (3g / 2l) cos(angle).
  return 0.5 * q[1] * q[1] + 3.0 * kGravity / (2.0 * kLength) * std::cos(q[0]);
}

}  // namespace acerac
