#pragma once

// Closed-form expected risks, optimal hyperparameters and proportional
// asymptotics for isotropic Gaussian designs. Every function is pure.
// b2 is the squared norm of the true coefficient vector.

#include <optional>
#include <string>

#include "ddlab/linalg.hpp"

namespace ddlab {

enum class Regime { Underparameterized, Overparameterized, Threshold };

/// n < p-1, n > p+1, or the band p-1 <= n <= p+1 where the moment formulas diverge.
Regime classify_regime(Eigen::Index n, Eigen::Index p);
std::string regime_name(Regime r);

struct RegimeRisk {
  Regime regime = Regime::Threshold;
  std::optional<double> excess;
  std::optional<double> total;
  bool defined() const { return excess.has_value(); }
};

struct ProblemScalars {
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  Eigen::Index k = 0;
  double sigma2 = 0.0;
  double b2 = 1.0;
  double c() const { return static_cast<double>(p) / static_cast<double>(n); }
};

/// Ridge risk conditional on the singular values u of X:
///   sum_i (b2 lambda^2 / p + sigma2 u_i^2) / (u_i^2 + lambda)^2 + sigma2.
/// Missing entries (u shorter than p) are zero singular values.
double ridge_risk_given_spectrum(const Vector& u, double lambda, double sigma2, double b2,
                                 Eigen::Index p);

double ridge_optimal_lambda(Eigen::Index p, double sigma2, double b2);

/// gamma_i = b2 m_i / (p sigma2 + b2 m_i), m_i = (X^T X)_ii. With these rates
/// diagonal dropout coincides with ridge at lambda = p sigma2 / b2.
Vector generalized_dropout_rates(const Vector& m, Eigen::Index p, double sigma2, double b2);

struct ScalarDropoutBounds {
  double lower = 0.0;
  double upper = 0.0;
  double alpha_opt = 0.0;
};

/// (b2 a^2 + p sigma2 e_p)/(tau_1 + a)^2 <= risk <= (b2 a^2 + p sigma2 e_1)/(tau_p + a)^2,
/// where tau are eigenvalues of the correlation matrix and e those of
/// Delta^{-1} X^T X Delta^{-1}; alpha_opt = p sigma2 e_1 / (b2 tau_p).
ScalarDropoutBounds scalar_dropout_bounds(double tau1, double taup, double e1, double ep,
                                          Eigen::Index p, double sigma2, double b2, double alpha);

/// Exact risk of the spectral dropout estimator averaged over X, noise and a
/// uniformly oriented truth.
RegimeRisk spectral_risk(Eigen::Index n, Eigen::Index p, double gamma, double sigma2, double b2);

struct SpectralOptimum {
  double gamma_opt = 0.0;
  RegimeRisk risk;
};

/// Throws UndefinedRegimeError inside the threshold band.
SpectralOptimum spectral_optimal(Eigen::Index n, Eigen::Index p, double sigma2, double b2);

/// Fourth-order expansion in alpha of the scalar-dropout risk (noise-free
/// terms only), valid for 0 <= alpha <= 1/(1+sqrt(p/n))^2 and n >= 3.
double taylor_risk(Eigen::Index n, Eigen::Index p, double alpha, double b2);
double taylor_alpha_limit(Eigen::Index n, Eigen::Index p);

/// Risk of the projected model y ~ (X Q^T) w fit with diagonal dropout in the
/// eigenbasis of the projected Gram matrix. q are its eigenvalues, h the
/// diagonal entries scaling each penalty, alpha the per-mode dropout ratios.
///   sigma2 + (1 - k/p) theta2
///     + sum_i (s2t q_i + (theta2/p) h_i^2 alpha_i^2) / (q_i + h_i alpha_i)^2,
/// s2t = sigma2 + (p-k)/p theta2.
double modelwise_risk_given_spectrum(const Vector& q, const Vector& h, const Vector& alpha,
                                     Eigen::Index p, double sigma2, double theta2);

struct ModelwiseAlpha {
  Vector alpha;
  double sigma_tilde2 = 0.0;
};

/// alpha_i = p s2t / (h_i theta2), the minimizer of each term above.
ModelwiseAlpha modelwise_optimal_alpha(const Vector& h, Eigen::Index k, Eigen::Index p,
                                       double sigma2, double theta2);

/// s2t + sum_i s2t / (q_i + p s2t / theta2), the value at the minimizer.
double modelwise_optimal_risk_given_spectrum(const Vector& q, Eigen::Index k, Eigen::Index p,
                                             double sigma2, double theta2);

double modelwise_sigma_tilde2(Eigen::Index k, Eigen::Index p, double sigma2, double theta2);

/// Companion Stieltjes transform of the Marchenko-Pastur law with ratio c,
/// evaluated at z = -lambda.
double mp_stieltjes(double c, double lambda);
/// d m / d z at z = -lambda (positive).
double mp_stieltjes_derivative(double c, double lambda);

/// Limiting ridge risk when p/n -> c and diag(X^T X)/n -> I:
///   sigma2 + lambda^2 b2 m' + c sigma2 (m - lambda m').
double asymptotic_risk(double c, double lambda, double sigma2, double b2);

struct AsymptoticOptimum {
  double gamma_hat = 0.0;
  double lambda = 0.0;
  double risk = 0.0;
};

/// lambda* = c sigma2 / b2, gamma_hat = 1/(1 + lambda*), risk = sigma2 + c sigma2 m(-lambda*).
AsymptoticOptimum asymptotic_optimal(double c, double sigma2, double b2);

}  // namespace ddlab
