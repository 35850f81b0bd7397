#pragma once

#include <Eigen/Core>

#include "acerac/kron_gauss.hpp"
#include "acerac/rng.hpp"

namespace acerac {

/// AR(1) exploration noise
///   xi_1 = eps_1,  xi_t = alpha xi_{t-1} + sqrt(1 - alpha^2) eps_t,  eps ~ N(0, C)
/// whose marginal is N(0, C) at every t. Only the current value is kept.
class ArNoise {
 public:
  ArNoise(double alpha, const CovKernel& kernel);

  /// Draws a fresh xi ~ N(0, C); call at every episode start.
  void reset(Rng& rng);
  /// Advances one step of the recursion.
  void step(Rng& rng);

  const VectorXd& xi() const { return xi_; }
  double alpha() const { return alpha_; }
  bool fresh() const { return fresh_; }
  Eigen::Index dim() const { return chol_.rows(); }

 private:
  VectorXd draw_eps(Rng& rng) const;

  double alpha_;
  double innovation_scale_;
  MatrixXd chol_;
  VectorXd xi_;
  bool fresh_ = true;
};

/// 0.5^(1/d): keeps the autocorrelation per unit of physical time fixed as
/// the control rate is multiplied by d.
double default_alpha(int d);

}  // namespace acerac
