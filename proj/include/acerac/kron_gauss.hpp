#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "acerac/rng.hpp"

namespace acerac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Raised when a matrix that must be symmetric positive-definite is not.
class NotPositiveDefinite : public std::invalid_argument {
 public:
  explicit NotPositiveDefinite(const std::string& which)
      : std::invalid_argument(which + " is not symmetric positive-definite") {}
};

/// Raised when vector sizes do not match the distribution's dimension.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exclusive upper bound on the autocorrelation coefficient; the conditional lag
/// matrix becomes singular as alpha approaches one.
inline constexpr double kMaxAlpha = 1.0 - 1e-6;

/// Per-step noise covariance C with cached Cholesky factor and inverse.
///
/// A zero-variance isotropic kernel is allowed for noise generation (the
/// factor is the zero matrix) but cannot back a density; see degenerate().
class CovKernel {
 public:
  /// Throws NotPositiveDefinite("C") unless cov is symmetric positive-definite.
  explicit CovKernel(const MatrixXd& cov);

  /// sigma^2 I. sigma == 0 yields a degenerate kernel.
  static CovKernel isotropic(Eigen::Index dim, double sigma);

  Eigen::Index dim() const { return cov_.rows(); }
  const MatrixXd& cov() const { return cov_; }
  const MatrixXd& chol() const { return chol_; }
  const MatrixXd& inv() const { return inv_; }
  double log_det() const { return log_det_; }
  bool degenerate() const { return degenerate_; }

 private:
  CovKernel() = default;

  MatrixXd cov_;
  MatrixXd chol_;
  MatrixXd inv_;
  double log_det_ = 0.0;
  bool degenerate_ = false;
};

enum class LagKind { Stationary, Conditional };

/// n x n lag-correlation matrix of an AR(1) window.
///   Stationary:  L[l][k] = alpha^|l-k|
///   Conditional: L[l][k] = alpha^|l-k| - alpha^(l+k+2)
class LagMatrix {
 public:
  LagMatrix(LagKind kind, int n, double alpha);

  LagKind kind() const { return kind_; }
  int n() const { return n_; }
  double alpha() const { return alpha_; }
  const MatrixXd& matrix() const { return lambda_; }
  const MatrixXd& chol() const { return chol_; }
  const MatrixXd& inv() const { return inv_; }
  double log_det() const { return log_det_; }

 private:
  LagKind kind_;
  int n_;
  double alpha_;
  MatrixXd lambda_;
  MatrixXd chol_;
  MatrixXd inv_;
  double log_det_ = 0.0;
};

/// N(mean, Lambda (x) C) over stacked windows [x_0; x_1; ...; x_{n-1}],
/// each block of length dim. All work goes through the factors of Lambda and
/// C; the (n*dim)^2 covariance is never formed or inverted.
class KroneckerGaussian {
 public:
  KroneckerGaussian(LagMatrix lag, CovKernel kernel);

  int n() const { return lag_.n(); }
  Eigen::Index dim() const { return kernel_.dim(); }
  Eigen::Index size() const { return n() * dim(); }
  const LagMatrix& lag() const { return lag_; }
  const CovKernel& kernel() const { return kernel_; }

  /// ln det(Lambda (x) C) = dim ln det Lambda + n ln det C.
  double log_det() const;

  double log_density(const VectorXd& x, const VectorXd& mean) const;

  /// (Lambda^-1 (x) C^-1)(x - mean), the gradient of log_density w.r.t. mean.
  VectorXd grad_log_density_wrt_mean(const VectorXd& x, const VectorXd& mean) const;

  /// mean + (chol(Lambda) (x) chol(C)) z, z standard normal.
  VectorXd sample(const VectorXd& mean, Rng& rng) const;

  /// Explicit Lambda (x) C; for diagnostics and tests only.
  MatrixXd dense_covariance() const;

 private:
  void check_size(const VectorXd& v, const char* what) const;

  LagMatrix lag_;
  CovKernel kernel_;
};

KroneckerGaussian build_stationary(int n, double alpha, const MatrixXd& cov);
KroneckerGaussian build_conditional(int n, double alpha, const MatrixXd& cov);

/// (n*dim) x dim operator stacking alpha^(k+1) I for k = 0..n-1; maps the
/// preceding noise value to the conditional mean of the next n values.
MatrixXd conditional_mean_operator(int n, double alpha, Eigen::Index dim);

/// Plain Kronecker product a (x) b.
MatrixXd kronecker(const MatrixXd& a, const MatrixXd& b);

}  // namespace acerac
