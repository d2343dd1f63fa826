#include "ddlab/risk_theory.hpp"

#include <cmath>
#include <string>

#include "ddlab/error.hpp"

namespace ddlab {

namespace {

double dbl(Eigen::Index v) { return static_cast<double>(v); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

}  // namespace

Regime classify_regime(Eigen::Index n, Eigen::Index p) {
  if (n < p - 1) return Regime::Underparameterized;
  if (n > p + 1) return Regime::Overparameterized;
  return Regime::Threshold;
}

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::Underparameterized: return "underparameterized";
    case Regime::Overparameterized: return "overparameterized";
    default: return "threshold";
  }
}

double ridge_risk_given_spectrum(const Vector& u, double lambda, double sigma2, double b2,
                                 Eigen::Index p) {
  require(p >= 1, "ridge_risk_given_spectrum: p must be >= 1");
  require(lambda >= 0.0, "ridge_risk_given_spectrum: lambda must be >= 0");
  if (u.size() > p) throw DimensionError("ridge_risk_given_spectrum: more singular values than p");
  const double bias = b2 * lambda * lambda / dbl(p);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double u2 = i < u.size() ? u(i) * u(i) : 0.0;
    const double denom = u2 + lambda;
    if (denom == 0.0)
      throw SingularityError("ridge_risk_given_spectrum: lambda = 0 with a zero singular value");
    sum += (bias + sigma2 * u2) / (denom * denom);
  }
  return sum + sigma2;
}

double ridge_optimal_lambda(Eigen::Index p, double sigma2, double b2) {
  require(b2 > 0.0, "ridge_optimal_lambda: b2 must be > 0 (b2 = 0 means infinite shrinkage)");
  require(sigma2 >= 0.0, "ridge_optimal_lambda: sigma2 must be >= 0");
  return dbl(p) * sigma2 / b2;
}

Vector generalized_dropout_rates(const Vector& m, Eigen::Index p, double sigma2, double b2) {
  require(b2 > 0.0, "generalized_dropout_rates: b2 must be > 0");
  require(sigma2 >= 0.0, "generalized_dropout_rates: sigma2 must be >= 0");
  Vector g(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    require(m(i) > 0.0, "generalized_dropout_rates: m[" + std::to_string(i) + "] must be > 0");
    g(i) = b2 * m(i) / (dbl(p) * sigma2 + b2 * m(i));
  }
  return g;
}

ScalarDropoutBounds scalar_dropout_bounds(double tau1, double taup, double e1, double ep,
                                          Eigen::Index p, double sigma2, double b2, double alpha) {
  require(taup > 0.0, "scalar_dropout_bounds: tau_p must be > 0");
  require(tau1 >= taup, "scalar_dropout_bounds: need tau_1 >= tau_p");
  require(ep >= 0.0 && e1 >= ep, "scalar_dropout_bounds: need e_1 >= e_p >= 0");
  require(alpha >= 0.0, "scalar_dropout_bounds: alpha must be >= 0");
  ScalarDropoutBounds out;
  const double a2 = alpha * alpha;
  out.lower = (b2 * a2 + dbl(p) * sigma2 * ep) / ((tau1 + alpha) * (tau1 + alpha));
  out.upper = (b2 * a2 + dbl(p) * sigma2 * e1) / ((taup + alpha) * (taup + alpha));
  out.alpha_opt = b2 > 0.0 ? dbl(p) * sigma2 * e1 / (b2 * taup) : INFINITY;
  return out;
}

RegimeRisk spectral_risk(Eigen::Index n, Eigen::Index p, double gamma, double sigma2, double b2) {
  require(gamma >= 0.0 && gamma <= 1.0, "spectral_risk: gamma must lie in [0,1]");
  require(n >= 1 && p >= 1, "spectral_risk: n and p must be >= 1");
  RegimeRisk r;
  r.regime = classify_regime(n, p);
  const double nn = dbl(n), pp = dbl(p), g2 = gamma * gamma;
  if (r.regime == Regime::Underparameterized) {
    r.excess = b2 * (1.0 + (nn / pp) * (g2 - 2.0 * gamma)) + sigma2 * g2 * nn / (pp - nn - 1.0);
  } else if (r.regime == Regime::Overparameterized) {
    r.excess = b2 * (gamma - 1.0) * (gamma - 1.0) + sigma2 * pp * g2 / (nn - pp - 1.0);
  } else {
    return r;
  }
  r.total = *r.excess + sigma2;
  return r;
}

SpectralOptimum spectral_optimal(Eigen::Index n, Eigen::Index p, double sigma2, double b2) {
  require(b2 > 0.0, "spectral_optimal: b2 must be > 0");
  const Regime regime = classify_regime(n, p);
  if (regime == Regime::Threshold)
    throw UndefinedRegimeError("spectral_optimal: undefined at the interpolation threshold (n = " +
                               std::to_string(n) + ", p = " + std::to_string(p) + ")");
  const double nn = dbl(n), pp = dbl(p);
  const double dof = regime == Regime::Underparameterized ? pp - nn - 1.0 : nn - pp - 1.0;
  SpectralOptimum out;
  out.gamma_opt = b2 / (b2 + sigma2 * pp / dof);
  out.risk = spectral_risk(n, p, out.gamma_opt, sigma2, b2);
  return out;
}

double taylor_alpha_limit(Eigen::Index n, Eigen::Index p) {
  const double s = 1.0 + std::sqrt(dbl(p) / dbl(n));
  return 1.0 / (s * s);
}

double taylor_risk(Eigen::Index n, Eigen::Index p, double alpha, double b2) {
  require(n >= 3, "taylor_risk: n must be >= 3");
  require(p >= 1, "taylor_risk: p must be >= 1");
  const double limit = taylor_alpha_limit(n, p);
  require(alpha >= 0.0 && alpha <= limit,
          "taylor_risk: alpha = " + std::to_string(alpha) +
              " violates the eigenvalue restriction 0 <= alpha <= 1/(1+sqrt(p/n))^2 = " +
              std::to_string(limit));
  const double nn = dbl(n), pp = dbl(p);
  const double a2 = alpha * alpha, a3 = a2 * alpha, a4 = a3 * alpha;
  const double lead = (1.0 - 2.0 * alpha + a2 * (pp / nn) * (3.0 + 2.0 / (nn - 2.0))) * b2;
  return lead + a2 * pp / (nn - 2.0) + a3 * (pp / (nn - 2.0)) * ((pp - 1.0) / nn + 1.0) +
         a4 * (4.0 * pp * pp - 2.0 * pp - 1.0 + nn) / (nn * (nn - 2.0));
}

double modelwise_sigma_tilde2(Eigen::Index k, Eigen::Index p, double sigma2, double theta2) {
  return sigma2 + dbl(p - k) / dbl(p) * theta2;
}

double modelwise_risk_given_spectrum(const Vector& q, const Vector& h, const Vector& alpha,
                                     Eigen::Index p, double sigma2, double theta2) {
  const Eigen::Index k = q.size();
  if (h.size() != k || alpha.size() != k)
    throw DimensionError("modelwise_risk_given_spectrum: q, h and alpha must have equal length");
  require(k <= p, "modelwise_risk_given_spectrum: k must be <= p");
  const double s2t = modelwise_sigma_tilde2(k, p, sigma2, theta2);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double pen = h(i) * alpha(i);
    const double denom = q(i) + pen;
    if (denom == 0.0)
      throw SingularityError("modelwise_risk_given_spectrum: q_i + h_i alpha_i = 0 at i = " +
                             std::to_string(i));
    sum += (s2t * q(i) + theta2 / dbl(p) * pen * pen) / (denom * denom);
  }
  return sigma2 + (1.0 - dbl(k) / dbl(p)) * theta2 + sum;
}

ModelwiseAlpha modelwise_optimal_alpha(const Vector& h, Eigen::Index k, Eigen::Index p,
                                       double sigma2, double theta2) {
  require(theta2 > 0.0, "modelwise_optimal_alpha: theta2 must be > 0");
  require(k >= 1 && k <= p, "modelwise_optimal_alpha: need 1 <= k <= p");
  if (h.size() != k) throw DimensionError("modelwise_optimal_alpha: h must have length k");
  ModelwiseAlpha out;
  out.sigma_tilde2 = modelwise_sigma_tilde2(k, p, sigma2, theta2);
  out.alpha.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    require(h(i) > 0.0, "modelwise_optimal_alpha: h_i must be > 0");
    out.alpha(i) = dbl(p) * out.sigma_tilde2 / (h(i) * theta2);
  }
  return out;
}

double modelwise_optimal_risk_given_spectrum(const Vector& q, Eigen::Index k, Eigen::Index p,
                                             double sigma2, double theta2) {
  require(theta2 > 0.0, "modelwise_optimal_risk_given_spectrum: theta2 must be > 0");
  if (q.size() != k) throw DimensionError("modelwise_optimal_risk_given_spectrum: q must have length k");
  require(k <= p, "modelwise_optimal_risk_given_spectrum: k must be <= p");
  const double s2t = modelwise_sigma_tilde2(k, p, sigma2, theta2);
  const double shift = dbl(p) * s2t / theta2;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double denom = q(i) + shift;
    if (denom == 0.0) throw SingularityError("modelwise_optimal_risk_given_spectrum: zero denominator");
    sum += s2t / denom;
  }
  return s2t + sum;
}

double mp_stieltjes(double c, double lambda) {
  require(c > 0.0 && lambda > 0.0, "mp_stieltjes: c and lambda must be > 0");
  const double b = 1.0 - c + lambda;
  const double s = std::sqrt(b * b + 4.0 * c * lambda);
  // (-b + s) loses digits when b >> 0; use the conjugate form there.
  const double num = b > 0.0 ? 4.0 * c * lambda / (b + s) : s - b;
  return num / (2.0 * c * lambda);
}

double mp_stieltjes_derivative(double c, double lambda) {
  require(c > 0.0 && lambda > 0.0, "mp_stieltjes_derivative: c and lambda must be > 0");
  // m(-l) = (s - b) / (2 c l), b = 1 - c + l, s = sqrt(b^2 + 4 c l).
  // d/dl m(-l) = ((b + 2c)/s - 1) / (2 c l) - m(-l) / l; the derivative in z is its negative.
  const double b = 1.0 - c + lambda;
  const double s = std::sqrt(b * b + 4.0 * c * lambda);
  const double m = mp_stieltjes(c, lambda);
  // (b + 2c)/s - 1 = ((b+2c)^2 - s^2) / (s (b + 2c + s)) and (b+2c)^2 - s^2 = 4c.
  const double bp = b + 2.0 * c;
  const double first = bp + s != 0.0 ? 4.0 * c / (s * (bp + s)) : 0.0;
  const double dm_dl = first / (2.0 * c * lambda) - m / lambda;
  return -dm_dl;
}

double asymptotic_risk(double c, double lambda, double sigma2, double b2) {
  const double m = mp_stieltjes(c, lambda);
  const double dm = mp_stieltjes_derivative(c, lambda);
  return sigma2 + lambda * lambda * b2 * dm + c * sigma2 * (m - lambda * dm);
}

AsymptoticOptimum asymptotic_optimal(double c, double sigma2, double b2) {
  require(b2 > 0.0, "asymptotic_optimal: b2 must be > 0");
  require(c > 0.0, "asymptotic_optimal: c must be > 0");
  require(sigma2 >= 0.0, "asymptotic_optimal: sigma2 must be >= 0");
  AsymptoticOptimum out;
  out.lambda = c * sigma2 / b2;
  out.gamma_hat = b2 / (c * sigma2 + b2);
  if (out.lambda > 0.0) {
    out.risk = sigma2 + c * sigma2 * mp_stieltjes(c, out.lambda);
  } else {
    // Noiseless limit: the min-norm interpolator has excess (1 - 1/c) b2 when c > 1.
    out.risk = c > 1.0 ? (1.0 - 1.0 / c) * b2 : 0.0;
  }
  return out;
}

}  // namespace ddlab
