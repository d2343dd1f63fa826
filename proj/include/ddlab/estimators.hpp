#pragma once

// Coefficient estimators for linear regression under dropout, the dropout
// training objective, and the test-risk functional.
//
// Dropout estimators are returned in the beta' = gamma * beta
// parameterization, i.e. the minimizer of
//   || y - gamma X beta ||^2 + gamma (1 - gamma) || Gamma beta ||^2,
// Gamma = diag(X^T X)^{1/2}, rescaled by gamma.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "ddlab/datagen.hpp"
#include "ddlab/linalg.hpp"
#include "ddlab/rng.hpp"

namespace ddlab {

struct Ols {};
struct Ridge {
  double lambda = 0.0;
};
struct DropoutScalar {
  double gamma = 1.0;
};
struct DropoutDiagonal {
  Vector gammas;
};
struct DropoutSpectral {
  double gamma = 1.0;
};

using EstimatorSpec = std::variant<Ols, Ridge, DropoutScalar, DropoutDiagonal, DropoutSpectral>;

std::string estimator_name(const EstimatorSpec& spec);

struct CoefficientEstimate {
  Vector beta_hat;
  /// Set when beta_hat lives in the eigenbasis of X^T X; columns of P are the
  /// eigenvectors, so the standard-basis estimate is P * beta_hat.
  std::optional<Matrix> rotation;

  bool rotated() const { return rotation.has_value(); }
  Vector in_standard_basis() const;
};

CoefficientEstimate fit_ols(const RegressionDataset& ds);
CoefficientEstimate fit_ridge(const RegressionDataset& ds, double lambda);
CoefficientEstimate fit_dropout_scalar(const RegressionDataset& ds, double gamma);
CoefficientEstimate fit_dropout_diagonal(const RegressionDataset& ds, const Vector& gammas);
CoefficientEstimate fit_dropout_spectral(const RegressionDataset& ds, double gamma);
CoefficientEstimate fit(const RegressionDataset& ds, const EstimatorSpec& spec);

/// Multi-output fit: each column of `y` is an independent response. Returns a
/// p x q coefficient matrix in the standard basis. Used by the feature sweeps.
Matrix fit_multi(const Matrix& x, const Matrix& y, const EstimatorSpec& spec);

/// (X^T X + diag(penalty))^{-1} X^T rhs through an eigendecomposition.
/// Throws SingularityError when the system matrix is numerically singular.
Matrix solve_generalized_ridge(const Matrix& x, const Matrix& rhs, const Vector& penalty);

double dropout_objective_closed(const RegressionDataset& ds, const Vector& beta, double gamma);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
};

/// Average of || y - (R * X) beta ||^2 over n_masks Bernoulli(gamma) masks R.
/// `threads` <= 1 runs the serial reference; the result does not depend on it.
McEstimate dropout_objective_mc(const RegressionDataset& ds, const Vector& beta, double gamma,
                                std::int64_t n_masks, Seed seed, int threads = 1);

struct TestRisk {
  double excess = 0.0;
  double total = 0.0;
};

TestRisk test_risk(const CoefficientEstimate& est, const Vector& beta_star, double sigma2);

}  // namespace ddlab
