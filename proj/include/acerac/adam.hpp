#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace acerac {

struct AdamConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamState(Eigen::Index size, AdamConfig config)
      : cfg(config), m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)) {}

  AdamConfig cfg;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t t = 0;
  std::int64_t skipped = 0;  // updates refused because of non-finite input
};

enum class StepSense { Ascend, Descend };

/// One bias-corrected ADAM update of params along direction. Ascend moves
/// params along +direction (the actor and critic both ascend their
/// improvement directions). Returns false and leaves params and moments
/// untouched, bumping st.skipped, if direction has a non-finite entry.
bool adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& direction, AdamState& st,
               StepSense sense = StepSense::Ascend);

}  // namespace acerac
