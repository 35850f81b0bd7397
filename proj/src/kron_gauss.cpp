#include "acerac/kron_gauss.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

namespace acerac {

namespace {

struct Factors {
  MatrixXd chol;
  MatrixXd inv;
  double log_det;
};

Factors factorize(const MatrixXd& m, const std::string& name) {
  if (m.rows() == 0 || m.rows() != m.cols() || !m.allFinite() || m != m.transpose()) {
    throw NotPositiveDefinite(name);
  }
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite(name);
  MatrixXd l = llt.matrixL();
  if ((l.diagonal().array() <= 0.0).any()) throw NotPositiveDefinite(name);
  const auto n = m.rows();
  MatrixXd inv = llt.solve(MatrixXd::Identity(n, n));
  inv = 0.5 * (inv + inv.transpose());
  // Log space: det itself under/overflows for long windows.
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  return {std::move(l), std::move(inv), log_det};
}

double lag_power(double alpha, int k) {
  // pow(0, 0) == 1 as required for alpha = 0.
  return std::pow(alpha, k);
}

}  // namespace

CovKernel::CovKernel(const MatrixXd& cov) : cov_(cov) {
  auto f = factorize(cov_, "C");
  chol_ = std::move(f.chol);
  inv_ = std::move(f.inv);
  log_det_ = f.log_det;
}

CovKernel CovKernel::isotropic(Eigen::Index dim, double sigma) {
  if (dim <= 0) throw std::invalid_argument("CovKernel: dim must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("CovKernel: sigma must be finite and non-negative");
  }
  if (sigma > 0.0) return CovKernel(sigma * sigma * MatrixXd::Identity(dim, dim));
  CovKernel k;
  k.cov_ = MatrixXd::Zero(dim, dim);
  k.chol_ = MatrixXd::Zero(dim, dim);
  k.inv_ = MatrixXd::Constant(dim, dim, std::numeric_limits<double>::quiet_NaN());
  k.log_det_ = -std::numeric_limits<double>::infinity();
  k.degenerate_ = true;
  return k;
}

LagMatrix::LagMatrix(LagKind kind, int n, double alpha)
    : kind_(kind), n_(n), alpha_(alpha) {
  if (n < 1) throw std::invalid_argument("LagMatrix: window length must be >= 1");
  if (!(alpha >= 0.0) || alpha >= kMaxAlpha) {
    throw std::invalid_argument("LagMatrix: alpha must lie in [0, 1 - 1e-6)");
  }
  lambda_.resize(n, n);
  for (int l = 0; l < n; ++l) {
    for (int k = 0; k < n; ++k) {
      double v = lag_power(alpha, std::abs(l - k));
      if (kind == LagKind::Conditional) v -= lag_power(alpha, l + k + 2);
      lambda_(l, k) = v;
    }
  }
  auto f = factorize(lambda_, kind == LagKind::Stationary ? "Lambda0" : "Lambda1");
  chol_ = std::move(f.chol);
  inv_ = std::move(f.inv);
  log_det_ = f.log_det;
}

KroneckerGaussian::KroneckerGaussian(LagMatrix lag, CovKernel kernel)
    : lag_(std::move(lag)), kernel_(std::move(kernel)) {
  if (kernel_.degenerate()) throw NotPositiveDefinite("C");
}

double KroneckerGaussian::log_det() const {
  return static_cast<double>(dim()) * lag_.log_det() +
         static_cast<double>(n()) * kernel_.log_det();
}

void KroneckerGaussian::check_size(const VectorXd& v, const char* what) const {
  if (v.size() != size()) {
    throw DimensionMismatch(std::string("KroneckerGaussian: ") + what + " has length " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(size()));
  }
}

// A stacked vector v of n blocks of length dim is vec(R) for the dim x n
// matrix R whose k-th column is block k. Then (Lambda (x) C) vec(R) =
// vec(C R Lambda^T), which all routines below exploit.

double KroneckerGaussian::log_density(const VectorXd& x, const VectorXd& mean) const {
  check_size(x, "x");
  check_size(mean, "mean");
  const VectorXd r = x - mean;
  Eigen::Map<const MatrixXd> resid(r.data(), dim(), n());
  // ||chol(C)^-1 R chol(Lambda)^-T||_F^2 = vec(R)^T (Lambda (x) C)^-1 vec(R)
  MatrixXd y = kernel_.chol().triangularView<Eigen::Lower>().solve(resid);
  MatrixXd zt = lag_.chol().triangularView<Eigen::Lower>().solve(y.transpose());
  const double quad = zt.squaredNorm();
  const double k = static_cast<double>(size());
  return -0.5 * (k * std::log(2.0 * std::numbers::pi) + log_det() + quad);
}

VectorXd KroneckerGaussian::grad_log_density_wrt_mean(const VectorXd& x,
                                                      const VectorXd& mean) const {
  check_size(x, "x");
  check_size(mean, "mean");
  const VectorXd r = x - mean;
  Eigen::Map<const MatrixXd> resid(r.data(), dim(), n());
  VectorXd out(size());
  Eigen::Map<MatrixXd> g(out.data(), dim(), n());
  g.noalias() = kernel_.inv() * resid * lag_.inv();
  return out;
}

VectorXd KroneckerGaussian::sample(const VectorXd& mean, Rng& rng) const {
  check_size(mean, "mean");
  VectorXd z = rng.normal_vector(size());
  Eigen::Map<const MatrixXd> zm(z.data(), dim(), n());
  VectorXd out(size());
  Eigen::Map<MatrixXd> o(out.data(), dim(), n());
  o.noalias() = kernel_.chol() * zm * lag_.chol().transpose();
  out += mean;
  return out;
}

MatrixXd KroneckerGaussian::dense_covariance() const {
  return kronecker(lag_.matrix(), kernel_.cov());
}

KroneckerGaussian build_stationary(int n, double alpha, const MatrixXd& cov) {
  return KroneckerGaussian(LagMatrix(LagKind::Stationary, n, alpha), CovKernel(cov));
}

KroneckerGaussian build_conditional(int n, double alpha, const MatrixXd& cov) {
  return KroneckerGaussian(LagMatrix(LagKind::Conditional, n, alpha), CovKernel(cov));
}

MatrixXd conditional_mean_operator(int n, double alpha, Eigen::Index dim) {
  if (n < 1) throw std::invalid_argument("conditional_mean_operator: n must be >= 1");
  MatrixXd b = MatrixXd::Zero(n * dim, dim);
  double p = alpha;
  for (int k = 0; k < n; ++k) {
    b.block(k * dim, 0, dim, dim).diagonal().setConstant(p);
    p *= alpha;
  }
  return b;
}

MatrixXd kronecker(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace acerac
