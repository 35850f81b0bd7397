#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "acerac/policy.hpp"
#include "acerac/rng.hpp"

namespace acerac {

enum class EnvId { Pendulum, PointMass };

/// Static description of a task at discretization factor d: physics runs at
/// base_dt / d, episodes last base_steps * d steps and per-step rewards are
/// scaled by 1/d so episodic returns keep their magnitude.
struct EnvSpec {
  EnvId id;
  std::string name;
  int state_dim;  // observation size
  int action_dim;
  ActionBounds bounds;
  double base_dt;
  int base_steps;
  int d;

  double dt() const { return base_dt / d; }
  int episode_length() const { return base_steps * d; }
  double reward_scale() const { return 1.0 / d; }
};

/// Throws std::invalid_argument for an unknown id or d < 1.
EnvSpec make_env_spec(const std::string& id, int d);
std::vector<std::string> env_ids();

/// Physical state plus the step counter within the episode.
///   pendulum:   q = (angle from upright, angular velocity)
///   point_mass: q = (x, y, vx, vy)
struct EnvState {
  VectorXd q;
  int t = 0;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool terminal = false;
  bool truncated = false;
};

/// Pendulum swing-up (gravity 10, unit mass and length, torque limit 2,
/// speed limit 8). Observation (cos angle, sin angle, angular velocity),
/// angle measured from upright. Cost angle^2 + 0.1 omega^2 + 0.001 u^2.
/// Initial angle uniform on [-pi, pi), angular velocity uniform on [-1, 1].
///
/// Point mass in the plane driven to the origin by forces in [-1, 1]^2 with
/// linear drag 0.5. Observation (x, y, vx, vy). Cost |p|^2 + 0.1|v|^2 +
/// 0.01|u|^2. Starts at rest, uniform on [-1, 1]^2; terminates once
/// |p| < 0.05 and |v| < 0.1.
///
/// Both integrate with semi-implicit Euler: velocity first, then position
/// with the new velocity.
class Environment {
 public:
  explicit Environment(EnvSpec spec) : spec_(std::move(spec)) {}

  const EnvSpec& spec() const { return spec_; }

  EnvState reset(Rng& rng) const;
  /// Pure in (state, action). The action is expected within bounds.
  /// Throws std::runtime_error if the state becomes non-finite.
  StepResult step(const EnvState& state, const VectorXd& action) const;
  VectorXd observe(const EnvState& state) const;

  /// Total energy of the pendulum (kinetic + potential, per unit inertia).
  static double pendulum_energy(const VectorXd& q);

 private:
  EnvSpec spec_;
};

}  // namespace acerac
