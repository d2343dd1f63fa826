#pragma once

// Small utilities shared by the unit tests. Nothing here calls into the
// library's solvers, so these can serve as independent reference paths.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include <Eigen/Dense>

namespace testing {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(eng);
  return m;
}

inline Vector gaussian_vector(Eigen::Index n, std::uint64_t seed) { return gaussian(n, 1, seed).col(0); }

inline Matrix random_psd(Eigen::Index n, Eigen::Index rank, std::uint64_t seed) {
  const Matrix f = gaussian(n, rank, seed);
  return f * f.transpose();
}

/// Conjugate gradients for a symmetric positive definite system.
inline Vector conjugate_gradient(const Matrix& a, const Vector& b, double tol = 1e-14, int max_iter = 10000) {
  Vector x = Vector::Zero(b.size());
  Vector r = b;
  Vector d = r;
  double rr = r.squaredNorm();
  const double stop = tol * tol * b.squaredNorm();
  for (int it = 0; it < max_iter && rr > stop; ++it) {
    const Vector ad = a * d;
    const double step = rr / d.dot(ad);
    x += step * d;
    r -= step * ad;
    const double rr_next = r.squaredNorm();
    d = r + (rr_next / rr) * d;
    rr = rr_next;
  }
  return x;
}

/// Golden-section search for the minimum of a unimodal function on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-10) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testing
