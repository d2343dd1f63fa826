#include "ddlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

#include "ddlab/error.hpp"
#include "ddlab/kernels.hpp"

namespace ddlab {

namespace {

void check_gamma(double gamma, const char* who) {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw DomainError(std::string(who) + ": gamma must lie in (0,1], got " + std::to_string(gamma));
}

void check_rows(const Matrix& x, const Matrix& y, const char* who) {
  if (x.rows() < 1 || x.cols() < 1) throw DimensionError(std::string(who) + ": empty design");
  if (y.rows() != x.rows())
    throw DimensionError(std::string(who) + ": design has " + std::to_string(x.rows()) +
                         " rows but response has " + std::to_string(y.rows()));
}

Vector column_norms2(const Matrix& x) { return x.colwise().squaredNorm().transpose(); }

Vector dropout_penalty(const Matrix& x, const Vector& gammas) {
  const Vector m = column_norms2(x);
  return ((1.0 - gammas.array()) / gammas.array() * m.array()).matrix();
}

Vector uniform_gammas(Eigen::Index p, double gamma) { return Vector::Constant(p, gamma); }

void check_gammas(const Vector& gammas, Eigen::Index p, const char* who) {
  if (gammas.size() != p)
    throw DimensionError(std::string(who) + ": expected " + std::to_string(p) + " rates, got " +
                         std::to_string(gammas.size()));
  for (Eigen::Index i = 0; i < p; ++i)
    if (!(gammas(i) > 0.0 && gammas(i) <= 1.0))
      throw DomainError(std::string(who) + ": rate " + std::to_string(i) + " = " +
                        std::to_string(gammas(i)) + " is outside (0,1]");
}

struct Spectral {
  SymEigen eig;
  Vector inv;  // 1/d_i on the retained modes, 0 elsewhere
};

Spectral spectral_basis(const Matrix& x) {
  Spectral s;
  s.eig = sym_eig(gram(x));
  const Eigen::Index r = std::min(x.rows(), x.cols());
  const double cutoff = pinv_rtol(x.rows(), x.cols()) * std::max(s.eig.values(0), 0.0);
  s.inv = Vector::Zero(x.cols());
  for (Eigen::Index i = 0; i < r; ++i)
    if (s.eig.values(i) > cutoff) s.inv(i) = 1.0 / s.eig.values(i);
  return s;
}

}  // namespace

std::string estimator_name(const EstimatorSpec& spec) {
  switch (spec.index()) {
    case 0: return "ols";
    case 1: return "ridge";
    case 2: return "dropout_scalar";
    case 3: return "dropout_diagonal";
    default: return "dropout_spectral";
  }
}

Vector CoefficientEstimate::in_standard_basis() const {
  if (rotation) return *rotation * beta_hat;
  return beta_hat;
}

Matrix solve_generalized_ridge(const Matrix& x, const Matrix& rhs, const Vector& penalty) {
  check_rows(x, rhs, "solve_generalized_ridge");
  if (penalty.size() != x.cols())
    throw DimensionError("solve_generalized_ridge: penalty length " +
                         std::to_string(penalty.size()) + " != p = " + std::to_string(x.cols()));
  Matrix a = gram(x);
  a.diagonal() += penalty;
  const SymEigen e = sym_eig(a);
  const double top = e.values(0);
  const double bottom = e.values(e.values.size() - 1);
  if (!(top > 0.0) || bottom <= pinv_rtol(x.rows(), x.cols()) * top)
    throw SingularityError(
        "system matrix X^T X + penalty is singular (smallest eigenvalue " + std::to_string(bottom) +
        "); use fit_ols for the minimum-norm solution or add a positive penalty");
  const Matrix xty = x.transpose() * rhs;
  return e.vectors * (e.values.cwiseInverse().asDiagonal() * (e.vectors.transpose() * xty));
}

CoefficientEstimate fit_ols(const RegressionDataset& ds) {
  check_rows(ds.x, ds.y, "fit_ols");
  return {svd_lstsq(ds.x, ds.y).col(0), std::nullopt};
}

CoefficientEstimate fit_ridge(const RegressionDataset& ds, double lambda) {
  check_rows(ds.x, ds.y, "fit_ridge");
  if (!(lambda >= 0.0)) throw DomainError("fit_ridge: lambda must be >= 0");
  return {solve_generalized_ridge(ds.x, ds.y, Vector::Constant(ds.p(), lambda)).col(0),
          std::nullopt};
}

CoefficientEstimate fit_dropout_scalar(const RegressionDataset& ds, double gamma) {
  check_rows(ds.x, ds.y, "fit_dropout_scalar");
  check_gamma(gamma, "fit_dropout_scalar");
  const Vector penalty = dropout_penalty(ds.x, uniform_gammas(ds.p(), gamma));
  return {solve_generalized_ridge(ds.x, ds.y, penalty).col(0), std::nullopt};
}

CoefficientEstimate fit_dropout_diagonal(const RegressionDataset& ds, const Vector& gammas) {
  check_rows(ds.x, ds.y, "fit_dropout_diagonal");
  check_gammas(gammas, ds.p(), "fit_dropout_diagonal");
  return {solve_generalized_ridge(ds.x, ds.y, dropout_penalty(ds.x, gammas)).col(0),
          std::nullopt};
}

CoefficientEstimate fit_dropout_spectral(const RegressionDataset& ds, double gamma) {
  check_rows(ds.x, ds.y, "fit_dropout_spectral");
  check_gamma(gamma, "fit_dropout_spectral");
  Spectral s = spectral_basis(ds.x);
  // X* = X P is never formed: X*^T y = P^T (X^T y).
  const Vector z = s.eig.vectors.transpose() * (ds.x.transpose() * ds.y);
  Vector beta = gamma * s.inv.cwiseProduct(z);
  return {std::move(beta), std::move(s.eig.vectors)};
}

CoefficientEstimate fit(const RegressionDataset& ds, const EstimatorSpec& spec) {
  return std::visit(
      [&](const auto& e) -> CoefficientEstimate {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, Ols>) return fit_ols(ds);
        else if constexpr (std::is_same_v<T, Ridge>) return fit_ridge(ds, e.lambda);
        else if constexpr (std::is_same_v<T, DropoutScalar>) return fit_dropout_scalar(ds, e.gamma);
        else if constexpr (std::is_same_v<T, DropoutDiagonal>)
          return fit_dropout_diagonal(ds, e.gammas);
        else return fit_dropout_spectral(ds, e.gamma);
      },
      spec);
}

Matrix fit_multi(const Matrix& x, const Matrix& y, const EstimatorSpec& spec) {
  check_rows(x, y, "fit_multi");
  return std::visit(
      [&](const auto& e) -> Matrix {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, Ols>) {
          return svd_lstsq(x, y);
        } else if constexpr (std::is_same_v<T, Ridge>) {
          if (!(e.lambda >= 0.0)) throw DomainError("fit_multi: lambda must be >= 0");
          return solve_generalized_ridge(x, y, Vector::Constant(x.cols(), e.lambda));
        } else if constexpr (std::is_same_v<T, DropoutScalar>) {
          check_gamma(e.gamma, "fit_multi");
          return solve_generalized_ridge(x, y, dropout_penalty(x, uniform_gammas(x.cols(), e.gamma)));
        } else if constexpr (std::is_same_v<T, DropoutDiagonal>) {
          check_gammas(e.gammas, x.cols(), "fit_multi");
          return solve_generalized_ridge(x, y, dropout_penalty(x, e.gammas));
        } else {
          check_gamma(e.gamma, "fit_multi");
          const Spectral s = spectral_basis(x);
          const Matrix z = s.eig.vectors.transpose() * (x.transpose() * y);
          return e.gamma * (s.eig.vectors * (s.inv.asDiagonal() * z));
        }
      },
      spec);
}

double dropout_objective_closed(const RegressionDataset& ds, const Vector& beta, double gamma) {
  check_rows(ds.x, ds.y, "dropout_objective_closed");
  check_gamma(gamma, "dropout_objective_closed");
  if (beta.size() != ds.p()) throw DimensionError("dropout_objective_closed: beta has wrong length");
  const double fit_term = (ds.y - gamma * (ds.x * beta)).squaredNorm();
  const double penalty = column_norms2(ds.x).dot(beta.cwiseAbs2());
  return fit_term + gamma * (1.0 - gamma) * penalty;
}

McEstimate dropout_objective_mc(const RegressionDataset& ds, const Vector& beta, double gamma,
                                std::int64_t n_masks, Seed seed, int threads) {
  check_rows(ds.x, ds.y, "dropout_objective_mc");
  check_gamma(gamma, "dropout_objective_mc");
  if (beta.size() != ds.p()) throw DimensionError("dropout_objective_mc: beta has wrong length");
  if (n_masks < 1) throw DomainError("dropout_objective_mc: n_masks must be >= 1");
  const kernels::Moments m =
      threads <= 1 ? kernels::mask_objective_serial(ds.x, ds.y, beta, gamma, n_masks, seed)
                   : kernels::mask_objective_omp(ds.x, ds.y, beta, gamma, n_masks, seed, threads);
  return {m.mean, m.standard_error()};
}

TestRisk test_risk(const CoefficientEstimate& est, const Vector& beta_star, double sigma2) {
  if (est.beta_hat.size() != beta_star.size())
    throw DimensionError("test_risk: estimate has length " + std::to_string(est.beta_hat.size()) +
                         ", beta_star has length " + std::to_string(beta_star.size()));
  double excess;
  if (est.rotation) {
    if (est.rotation->rows() != beta_star.size())
      throw DimensionError("test_risk: rotation does not match beta_star");
    excess = (est.beta_hat - est.rotation->transpose() * beta_star).squaredNorm();
  } else {
    excess = (est.beta_hat - beta_star).squaredNorm();
  }
  return {excess, excess + sigma2};
}

}  // namespace ddlab
