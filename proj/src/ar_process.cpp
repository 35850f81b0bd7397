#include "acerac/ar_process.hpp"

#include <cmath>
#include <stdexcept>

namespace acerac {

ArNoise::ArNoise(double alpha, const CovKernel& kernel)
    : alpha_(alpha),
      innovation_scale_(std::sqrt(1.0 - alpha * alpha)),
      chol_(kernel.chol()),
      xi_(VectorXd::Zero(kernel.dim())) {
  if (!(alpha >= 0.0) || alpha >= kMaxAlpha) {
    throw std::invalid_argument("ArNoise: alpha must lie in [0, 1 - 1e-6)");
  }
}

VectorXd ArNoise::draw_eps(Rng& rng) const {
  return chol_.triangularView<Eigen::Lower>() * rng.normal_vector(dim());
}

void ArNoise::reset(Rng& rng) {
  xi_ = draw_eps(rng);
  fresh_ = true;
}

void ArNoise::step(Rng& rng) {
  xi_ = alpha_ * xi_ + innovation_scale_ * draw_eps(rng);
  fresh_ = false;
}

double default_alpha(int d) {
  if (d < 1) throw std::invalid_argument("default_alpha: d must be >= 1");
  return std::pow(0.5, 1.0 / d);
}

}  // namespace acerac
