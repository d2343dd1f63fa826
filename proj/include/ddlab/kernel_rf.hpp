#pragma once

// Random ReLU features, dropout on features, and kernel ridge regression
// with lambda = (1 - gamma) / gamma.

#include <cstdint>

#include "ddlab/datagen.hpp"
#include "ddlab/linalg.hpp"
#include "ddlab/rng.hpp"

namespace ddlab {

/// max(0, X W^T).
Matrix relu_embed(const Matrix& x, const FeatureWeights& w);

struct FeatureDropoutCheck {
  double closed = 0.0;
  double mc_mean = 0.0;
  double mc_se = 0.0;
};

/// Compares sum_i E_B || y_i - B a_i ||^2, B_jj ~ (1/gamma) Ber(gamma), with
/// sum_i || y_i - a_i ||^2 + (1-gamma)/gamma sum_ij a_ij^2.
/// y has D columns (elementwise) or a single column (compared with the row sum of a).
FeatureDropoutCheck feature_dropout_identity(const Matrix& a, const Matrix& y, double gamma,
                                             std::int64_t n_masks, Seed seed, int threads = 1);

struct KernelSystem {
  Matrix k;
  Vector alpha_star;
  double sigma2 = 0.0;

  Eigen::Index n() const { return k.rows(); }
};

/// features * features^T.
Matrix kernel_matrix(const Matrix& features);

/// (K + lambda I)^{-1} y; pseudoinverse when gamma = 1 and K is singular.
Vector krr_fit(const KernelSystem& sys, const Vector& y, double gamma);

/// In-sample risk E || K (K + lambda I)^{-1} y - K alpha* ||^2 over the noise,
/// evaluated in the eigenbasis of K:
///   sum_i (lambda^2 s_i^2 z_i^2 + sigma2 s_i^2) / (s_i + lambda)^2,  z = V^T alpha*.
/// At gamma = 1 this is sigma2 * rank(K).
double krr_insample_risk(const KernelSystem& sys, double gamma);

/// The same quantity from matrices:
///   || lambda (K + lambda I)^{-1} K alpha* ||^2 + sigma2 tr(K^2 (K + lambda I)^{-2}).
double krr_insample_risk_direct(const KernelSystem& sys, double gamma);

/// Risk with alpha* averaged over the sphere of radius ||alpha*||, spread over
/// the m retained modes: sum_i (||alpha*||^2 lambda^2 / m + sigma2) s_i^2 / (s_i + lambda)^2.
double krr_insample_risk_isotropic(const KernelSystem& sys, double gamma);

struct KrrOptimum {
  Vector lambda_diag;            // m sigma2 / (s_i ||alpha*||^2) per retained mode
  double inverse_spectrum_risk;  // sum_i sigma2 / s_i over retained modes
  double attained_risk;          // isotropic risk with the per-mode penalties
  Eigen::Index retained = 0;
  Vector spectrum;               // retained eigenvalues, descending
};

/// Retains eigenvalues above 1e-12 * s_1. Throws DegenerateKernelError when
/// none are positive and DomainError when alpha* = 0.
KrrOptimum krr_optimal(const KernelSystem& sys);

/// Isotropic risk term of one mode with penalty lambda.
double krr_mode_risk(double s, double lambda, double alpha2_per_mode, double sigma2);

/// Isotropic risk with every retained eigenvalue replaced by s_1.
double krr_upper_bound(const KernelSystem& sys, double gamma);

/// m sigma2 / (s_1 ||alpha*||^2), the penalty minimizing the bound's mode term.
double krr_bound_lambda(const KernelSystem& sys);

/// gamma = 1 / (1 + lambda).
inline double gamma_from_lambda(double lambda) { return 1.0 / (1.0 + lambda); }

}  // namespace ddlab
