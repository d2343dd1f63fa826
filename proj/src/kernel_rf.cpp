#include "ddlab/kernel_rf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddlab/error.hpp"
#include "ddlab/kernels.hpp"

namespace ddlab {

namespace {

constexpr double kSpectrumFloor = 1e-12;

double lambda_from_gamma(double gamma, const char* who) {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw DomainError(std::string(who) + ": gamma must lie in (0,1], got " + std::to_string(gamma));
  return (1.0 - gamma) / gamma;
}

void check_system(const KernelSystem& sys, const char* who) {
  if (sys.k.rows() != sys.k.cols() || sys.k.rows() < 1)
    throw DimensionError(std::string(who) + ": kernel matrix must be square and nonempty");
  if (sys.alpha_star.size() != sys.k.rows())
    throw DimensionError(std::string(who) + ": alpha_star length does not match K");
  if (!is_symmetric(sys.k, 1e-10 * std::max(1.0, sys.k.cwiseAbs().maxCoeff())))
    throw ShapeError(std::string(who) + ": kernel matrix is not symmetric");
}

/// Number of leading eigenvalues above the floor.
Eigen::Index retained_count(const Vector& s) {
  if (s.size() == 0 || !(s(0) > 0.0)) return 0;
  Eigen::Index m = 0;
  while (m < s.size() && s(m) > kSpectrumFloor * s(0)) ++m;
  return m;
}

}  // namespace

Matrix relu_embed(const Matrix& x, const FeatureWeights& w) {
  if (x.cols() != w.d())
    throw DimensionError("relu_embed: input has " + std::to_string(x.cols()) +
                         " columns, weights expect d = " + std::to_string(w.d()));
  return (x * w.w.transpose()).cwiseMax(0.0);
}

FeatureDropoutCheck feature_dropout_identity(const Matrix& a, const Matrix& y, double gamma,
                                             std::int64_t n_masks, Seed seed, int threads) {
  const double alpha = lambda_from_gamma(gamma, "feature_dropout_identity");
  if (y.rows() != a.rows() || (y.cols() != a.cols() && y.cols() != 1))
    throw DimensionError("feature_dropout_identity: y must be n x D or n x 1");
  if (n_masks < 1) throw DomainError("feature_dropout_identity: n_masks must be >= 1");
  FeatureDropoutCheck out;
  const bool summed = y.cols() == 1 && a.cols() != 1;
  const double fit_term =
      summed ? (y.col(0) - a.rowwise().sum()).squaredNorm() : (y - a).squaredNorm();
  out.closed = fit_term + alpha * a.squaredNorm();
  const kernels::Moments m = threads <= 1
                                 ? kernels::feature_mask_serial(a, y, gamma, n_masks, seed)
                                 : kernels::feature_mask_omp(a, y, gamma, n_masks, seed, threads);
  out.mc_mean = m.mean;
  out.mc_se = m.standard_error();
  return out;
}

Matrix kernel_matrix(const Matrix& features) {
  if (features.rows() < 1) throw DimensionError("kernel_matrix: need at least one sample");
  return outer_gram(features);
}

Vector krr_fit(const KernelSystem& sys, const Vector& y, double gamma) {
  const double lambda = lambda_from_gamma(gamma, "krr_fit");
  if (y.size() != sys.k.rows()) throw DimensionError("krr_fit: y length does not match K");
  const SymEigen e = sym_eig(sys.k);
  const Eigen::Index m = lambda > 0.0 ? e.values.size() : retained_count(e.values);
  Vector inv = Vector::Zero(e.values.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d = e.values(i) + lambda;
    if (d > 0.0) inv(i) = 1.0 / d;
  }
  return e.vectors * inv.cwiseProduct(e.vectors.transpose() * y);
}

double krr_insample_risk(const KernelSystem& sys, double gamma) {
  check_system(sys, "krr_insample_risk");
  const double lambda = lambda_from_gamma(gamma, "krr_insample_risk");
  const SymEigen e = sym_eig(sys.k);
  const Vector z = e.vectors.transpose() * sys.alpha_star;
  const Eigen::Index modes = lambda > 0.0 ? e.values.size() : retained_count(e.values);
  double risk = 0.0;
  for (Eigen::Index i = 0; i < modes; ++i) {
    const double s = std::max(e.values(i), 0.0);
    const double d = s + lambda;
    if (d == 0.0) continue;
    risk += (lambda * lambda * s * s * z(i) * z(i) + sys.sigma2 * s * s) / (d * d);
  }
  return risk;
}

double krr_insample_risk_direct(const KernelSystem& sys, double gamma) {
  check_system(sys, "krr_insample_risk_direct");
  const double lambda = lambda_from_gamma(gamma, "krr_insample_risk_direct");
  Matrix shifted = sys.k;
  shifted.diagonal().array() += lambda;
  Matrix resolvent_k;  // (K + lambda I)^{-1} K
  if (lambda > 0.0) {
    resolvent_k = shifted.ldlt().solve(sys.k);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sys.k);
    cod.setThreshold(kSpectrumFloor);
    resolvent_k = cod.pseudoInverse() * sys.k;
  }
  const double bias = (lambda * (resolvent_k * sys.alpha_star)).squaredNorm();
  // tr(K^2 (K + lambda I)^{-2}) = || (K + lambda I)^{-1} K ||_F^2 for commuting symmetric factors.
  const double variance = sys.sigma2 * resolvent_k.squaredNorm();
  return bias + variance;
}

double krr_mode_risk(double s, double lambda, double alpha2_per_mode, double sigma2) {
  const double d = s + lambda;
  if (d == 0.0) return 0.0;
  return (alpha2_per_mode * lambda * lambda + sigma2) * s * s / (d * d);
}

double krr_insample_risk_isotropic(const KernelSystem& sys, double gamma) {
  check_system(sys, "krr_insample_risk_isotropic");
  const double lambda = lambda_from_gamma(gamma, "krr_insample_risk_isotropic");
  const Vector s = sym_eigenvalues(sys.k);
  const Eigen::Index m = retained_count(s);
  if (m == 0) return 0.0;
  const double a = sys.alpha_star.squaredNorm() / static_cast<double>(m);
  double risk = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) risk += krr_mode_risk(s(i), lambda, a, sys.sigma2);
  return risk;
}

KrrOptimum krr_optimal(const KernelSystem& sys) {
  check_system(sys, "krr_optimal");
  const Vector s = sym_eigenvalues(sys.k);
  const Eigen::Index m = retained_count(s);
  if (m == 0) throw DegenerateKernelError("krr_optimal: kernel matrix has no positive eigenvalue");
  const double norm2 = sys.alpha_star.squaredNorm();
  if (!(norm2 > 0.0)) throw DomainError("krr_optimal: alpha_star must be nonzero");
  KrrOptimum out;
  out.retained = m;
  out.spectrum = s.head(m);
  out.lambda_diag.resize(m);
  out.inverse_spectrum_risk = 0.0;
  out.attained_risk = 0.0;
  const double a = norm2 / static_cast<double>(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out.lambda_diag(i) = static_cast<double>(m) * sys.sigma2 / (s(i) * norm2);
    out.inverse_spectrum_risk += sys.sigma2 / s(i);
    out.attained_risk += krr_mode_risk(s(i), out.lambda_diag(i), a, sys.sigma2);
  }
  return out;
}

double krr_upper_bound(const KernelSystem& sys, double gamma) {
  check_system(sys, "krr_upper_bound");
  const double lambda = lambda_from_gamma(gamma, "krr_upper_bound");
  const Vector s = sym_eigenvalues(sys.k);
  const Eigen::Index m = retained_count(s);
  if (m == 0) throw DegenerateKernelError("krr_upper_bound: kernel matrix has no positive eigenvalue");
  const double norm2 = sys.alpha_star.squaredNorm();
  return (norm2 * lambda * lambda + static_cast<double>(m) * sys.sigma2) * s(0) * s(0) /
         ((s(0) + lambda) * (s(0) + lambda));
}

double krr_bound_lambda(const KernelSystem& sys) {
  check_system(sys, "krr_bound_lambda");
  const Vector s = sym_eigenvalues(sys.k);
  const Eigen::Index m = retained_count(s);
  if (m == 0) throw DegenerateKernelError("krr_bound_lambda: kernel matrix has no positive eigenvalue");
  const double norm2 = sys.alpha_star.squaredNorm();
  if (!(norm2 > 0.0)) throw DomainError("krr_bound_lambda: alpha_star must be nonzero");
  return static_cast<double>(m) * sys.sigma2 / (s(0) * norm2);
}

}  // namespace ddlab
