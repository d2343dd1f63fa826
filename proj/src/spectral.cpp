#include "ddlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddlab/error.hpp"

namespace ddlab {

namespace {

Vector column_norms2_checked(const Matrix& x, const char* who) {
  Vector m = x.colwise().squaredNorm().transpose();
  for (Eigen::Index j = 0; j < m.size(); ++j)
    if (!(m(j) > 0.0))
      throw DegenerateColumnError(std::string(who) + ": column " + std::to_string(j) +
                                      " has zero norm",
                                  static_cast<long>(j));
  return m;
}

}  // namespace

MpEdges mp_edges(Eigen::Index n, Eigen::Index p) {
  if (n < 1 || p < 1) throw DimensionError("mp_edges: n and p must be >= 1");
  const double r = std::sqrt(static_cast<double>(p) / static_cast<double>(n));
  return {(1.0 + r) * (1.0 + r), (1.0 - r) * (1.0 - r)};
}

Matrix correlation_matrix(const Matrix& x) {
  const Vector m = column_norms2_checked(x, "correlation_matrix");
  const Vector s = m.cwiseSqrt().cwiseInverse();
  Matrix c = s.asDiagonal() * gram(x) * s.asDiagonal();
  c.diagonal().setOnes();
  return c;
}

SpectralSummary correlation_spectrum(const Matrix& x) {
  SpectralSummary out;
  out.eigenvalues = sym_eigenvalues(correlation_matrix(x));
  const MpEdges edges = mp_edges(x.rows(), x.cols());
  out.mp_upper = edges.upper;
  out.mp_lower = edges.lower;
  out.n = x.rows();
  out.p = x.cols();
  return out;
}

double largest_correlation_eigenvalue(const Matrix& x) {
  const Vector m = column_norms2_checked(x, "largest_correlation_eigenvalue");
  const Matrix z = x * m.cwiseSqrt().cwiseInverse().asDiagonal();
  const Vector v = z.rows() < z.cols() ? sym_eigenvalues(outer_gram(z)) : sym_eigenvalues(gram(z));
  return v(0);
}

ExtremeEigenvalues extreme_eigenvalues(const Matrix& m) {
  if (m.rows() == 0 || !is_symmetric(m, 1e-10))
    throw ShapeError("extreme_eigenvalues: matrix is not symmetric within 1e-10");
  const Vector v = sym_eigenvalues(m);
  return {v(0), v(v.size() - 1)};
}

ScaledGramSpectra scaled_gram_spectra(const Matrix& x) {
  const Vector m = column_norms2_checked(x, "scaled_gram_spectra");
  const Matrix g = gram(x);
  ScaledGramSpectra out;
  // Delta^{-1} G is similar to the correlation matrix, so it shares its spectrum.
  out.tau = sym_eigenvalues(correlation_matrix(x));
  const Vector inv = m.cwiseInverse();
  out.e = sym_eigenvalues(inv.asDiagonal() * g * inv.asDiagonal());
  return out;
}

InterlacingReport interlacing_check(const Matrix& x_small, const Matrix& x_big) {
  if (x_big.cols() != x_small.cols() || x_big.rows() < x_small.rows() ||
      x_big.topRows(x_small.rows()) != x_small)
    throw InputError("interlacing_check: x_big does not start with the rows of x_small");
  const Vector a = Eigen::BDCSVD<Matrix>(x_small).singularValues();
  const Vector b = Eigen::BDCSVD<Matrix>(x_big).singularValues();
  InterlacingReport out;
  out.min_gap = INFINITY;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double gap = b(i) - a(i);
    out.min_gap = std::min(out.min_gap, gap);
    if (gap < -1e-10) out.holds = false;
  }
  if (a.size() == 0) out.min_gap = 0.0;
  return out;
}

double diag_concentration(const Matrix& x) {
  if (x.rows() < 1) throw DimensionError("diag_concentration: n must be >= 1");
  const Vector m = x.colwise().squaredNorm().transpose() / static_cast<double>(x.rows());
  return (m.array() - 1.0).abs().maxCoeff();
}

}  // namespace ddlab
