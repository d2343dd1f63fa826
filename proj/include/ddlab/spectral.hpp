#pragma once

// Sample correlation spectra, Marchenko-Pastur edges and interlacing audits.
// All spectra are returned in descending order.

#include "ddlab/linalg.hpp"

namespace ddlab {

struct MpEdges {
  double upper = 0.0;
  double lower = 0.0;
};

/// ((1 + sqrt(p/n))^2, (1 - sqrt(p/n))^2).
MpEdges mp_edges(Eigen::Index n, Eigen::Index p);

struct SpectralSummary {
  Vector eigenvalues;
  double mp_upper = 0.0;
  double mp_lower = 0.0;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
};

/// C = Delta^{-1/2} X^T X Delta^{-1/2}, Delta = diag(X^T X). Unit diagonal.
Matrix correlation_matrix(const Matrix& x);

SpectralSummary correlation_spectrum(const Matrix& x);

/// Largest eigenvalue of the correlation matrix, computed from whichever of
/// the p x p and n x n Gram forms is smaller.
double largest_correlation_eigenvalue(const Matrix& x);

struct ExtremeEigenvalues {
  double largest = 0.0;
  double smallest = 0.0;
};

/// Throws ShapeError unless `m` is symmetric within 1e-10.
ExtremeEigenvalues extreme_eigenvalues(const Matrix& m);

struct ScaledGramSpectra {
  Vector tau;  // eigenvalues of Delta^{-1} X^T X (same as the correlation matrix)
  Vector e;    // eigenvalues of Delta^{-1} X^T X Delta^{-1}
};

ScaledGramSpectra scaled_gram_spectra(const Matrix& x);

struct InterlacingReport {
  bool holds = true;
  double min_gap = 0.0;  // min_i (u_big_i - u_small_i)
};

/// x_big must be x_small with rows appended (InputError otherwise). Holds when
/// every descending singular value satisfies u_big_i >= u_small_i - 1e-10.
InterlacingReport interlacing_check(const Matrix& x_small, const Matrix& x_big);

/// max_i |(X^T X)_ii / n - 1|.
double diag_concentration(const Matrix& x);

}  // namespace ddlab
