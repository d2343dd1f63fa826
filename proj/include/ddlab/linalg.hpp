#pragma once

#include <Eigen/Dense>

namespace ddlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigendecomposition of a symmetric matrix with values sorted descending.
/// Each eigenvector has its first non-negligible component positive, so the
/// basis is deterministic for inputs with distinct eigenvalues.
struct SymEigen {
  Vector values;
  Matrix vectors;  // columns; empty when only values were requested
};

SymEigen sym_eig(const Matrix& a);
Vector sym_eigenvalues(const Matrix& a);

/// X^T X, computed as a symmetric rank update.
Matrix gram(const Matrix& x);
/// X X^T.
Matrix outer_gram(const Matrix& x);

bool is_symmetric(const Matrix& a, double tol);

/// Relative pseudoinverse threshold max(n,p) * eps.
double pinv_rtol(Eigen::Index n, Eigen::Index p);

/// Minimum-norm least squares solution via a thin SVD of `x`; singular values
/// at or below max(n,p)*eps*s_max are treated as zero. Works column-wise on `rhs`.
Matrix svd_lstsq(const Matrix& x, const Matrix& rhs);

}  // namespace ddlab
