#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "ddlab/datagen.hpp"
#include "ddlab/error.hpp"
#include "ddlab/estimators.hpp"
#include "ddlab/harness.hpp"
#include "ddlab/risk_theory.hpp"
#include "helpers.hpp"

using namespace ddlab;

namespace {

double dbl(Eigen::Index v) { return static_cast<double>(v); }

// E || beta_hat - beta ||^2 + sigma2 for ridge, averaged over noise and over
// beta uniform on the sphere of squared radius b2, from traces of X^T X.
double ridge_risk_traces(const Matrix& x, double lambda, double sigma2, double b2) {
  const Eigen::Index p = x.cols();
  const Matrix g = x.transpose() * x;
  Matrix a = g;
  a.diagonal().array() += lambda;
  const Matrix inv = a.inverse();
  const double bias = b2 / dbl(p) * lambda * lambda * (inv * inv).trace();
  const double var = sigma2 * (inv * g * inv).trace();
  return bias + var + sigma2;
}

Vector singular_values(const Matrix& x) { return Eigen::JacobiSVD<Matrix>(x).singularValues(); }

}  // namespace

TEST_CASE("regime classification") {
  CHECK(classify_regime(100, 500) == Regime::Underparameterized);
  CHECK(classify_regime(498, 500) == Regime::Underparameterized);
  CHECK(classify_regime(499, 500) == Regime::Threshold);
  CHECK(classify_regime(501, 500) == Regime::Threshold);
  CHECK(classify_regime(502, 500) == Regime::Overparameterized);
}

TEST_CASE("ridge_risk_given_spectrum") {
  SUBCASE("unit spectrum without penalty") {
    CHECK(ridge_risk_given_spectrum(Vector::Ones(7), 0.0, 0.3, 1.0, 7) == doctest::Approx(8 * 0.3));
  }
  SUBCASE("large penalty tends to b2 + sigma2") {
    CHECK(ridge_risk_given_spectrum(Vector::Ones(7), 1e9, 0.3, 2.0, 7) == doctest::Approx(2.3).epsilon(1e-6));
  }
  SUBCASE("agrees with the trace form conditional on X") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Matrix x = testing::gaussian(s % 2 ? 50 : 12, 20, s);
      const double ref = ridge_risk_traces(x, 5.0, 0.25, 1.0);
      CHECK(ridge_risk_given_spectrum(singular_values(x), 5.0, 0.25, 1.0, 20) == doctest::Approx(ref).epsilon(1e-10));
    }
  }
  SUBCASE("agrees with Monte Carlo over the noise at fixed X and beta direction average") {
    const Eigen::Index n = 50, p = 20;
    const Matrix x = testing::gaussian(n, p, 77);
    const double lambda = 5.0, sigma2 = 0.25;
    std::vector<double> risks;
    for (std::uint64_t t = 0; t < 10000; ++t) {
      Vector beta = testing::gaussian_vector(p, 1000 + t);
      beta.normalize();
      const Vector y = x * beta + std::sqrt(sigma2) * testing::gaussian_vector(n, 50000 + t);
      RegressionDataset ds;
      ds.x = x;
      ds.y = y;
      risks.push_back(test_risk(fit_ridge(ds, lambda), beta, sigma2).total);
    }
    const SampleStats st = sample_stats(risks);
    const double closed = ridge_risk_given_spectrum(singular_values(x), lambda, sigma2, 1.0, p);
    CHECK(std::abs(st.mean - closed) <= 3.0 * st.se);
  }
  SUBCASE("errors") {
    Vector u = Vector::Ones(3);
    CHECK_THROWS_AS(ridge_risk_given_spectrum(u, 0.0, 0.1, 1.0, 5), SingularityError);
    CHECK_THROWS_AS(ridge_risk_given_spectrum(Vector::Ones(6), 1.0, 0.1, 1.0, 5), DimensionError);
  }
}

TEST_CASE("ridge_optimal_lambda") {
  CHECK(ridge_optimal_lambda(500, 0.25, 1.0) == 125.0);
  CHECK(ridge_optimal_lambda(17, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(ridge_optimal_lambda(5, 0.25, 0.0), DomainError);

  // The derivative of the conditional risk, averaged over sampled spectra, vanishes.
  const double lam = ridge_optimal_lambda(20, 0.25, 1.0), h = 1e-4;
  std::vector<double> derivs;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Vector u = singular_values(testing::gaussian(50, 20, 300 + s));
    derivs.push_back((ridge_risk_given_spectrum(u, lam + h, 0.25, 1.0, 20) -
                      ridge_risk_given_spectrum(u, lam - h, 0.25, 1.0, 20)) /
                     (2 * h));
  }
  const SampleStats st = sample_stats(derivs);
  CHECK(std::abs(st.mean) <= 3.0 * st.se + 1e-9);
}

TEST_CASE("generalized_dropout_rates") {
  const Vector m = (Vector(3) << 10.0, 5.0, 40.0).finished();
  const Vector noiseless = generalized_dropout_rates(m, 3, 0.0, 1.0);
  CHECK(noiseless.isApproxToConstant(1.0));
  const Vector bal = generalized_dropout_rates(Vector::Constant(4, 4 * 0.5 / 2.0), 4, 0.5, 2.0);
  CHECK(bal.isApproxToConstant(0.5));
  const Vector g = generalized_dropout_rates(m, 3, 0.25, 1.0);
  CHECK(g.minCoeff() > 0.0);
  CHECK(g.maxCoeff() < 1.0);
  CHECK_THROWS_AS(generalized_dropout_rates((Vector(2) << 1.0, 0.0).finished(), 2, 0.2, 1.0), DomainError);
}

TEST_CASE("scalar_dropout_bounds") {
  const ScalarDropoutBounds flat = scalar_dropout_bounds(1.3, 1.3, 0.02, 0.02, 10, 0.25, 1.0, 0.4);
  CHECK(flat.lower == doctest::Approx(flat.upper));
  const ScalarDropoutBounds zero = scalar_dropout_bounds(3.0, 0.2, 0.05, 0.0, 10, 0.25, 1.0, 0.0);
  CHECK(zero.lower == 0.0);
  const ScalarDropoutBounds b = scalar_dropout_bounds(2.9, 0.15, 0.06, 0.004, 20, 0.25, 1.0, 0.7);
  CHECK(b.lower <= b.upper);
  CHECK(b.alpha_opt == doctest::Approx(20 * 0.25 * 0.06 / 0.15));
  CHECK_THROWS_AS(scalar_dropout_bounds(1.0, 0.0, 0.1, 0.1, 5, 0.2, 1.0, 0.1), DomainError);
}

TEST_CASE("spectral_risk") {
  SUBCASE("gamma = 1 is the OLS risk") {
    const RegimeRisk r = spectral_risk(200, 50, 1.0, 0.3, 1.0);
    CHECK(*r.total == doctest::Approx(0.3 * 50 / 149.0 + 0.3));
  }
  SUBCASE("gamma = 0 is the null estimate in both regimes") {
    CHECK(*spectral_risk(200, 50, 0.0, 0.3, 2.0).total == doctest::Approx(2.3));
    CHECK(*spectral_risk(20, 50, 0.0, 0.3, 2.0).total == doctest::Approx(2.3));
  }
  SUBCASE("threshold band is undefined") {
    const RegimeRisk r = spectral_risk(500, 500, 0.8, 0.25, 1.0);
    CHECK(r.regime == Regime::Threshold);
    CHECK_FALSE(r.defined());
    CHECK_FALSE(r.total.has_value());
  }
  SUBCASE("total = excess + sigma2") {
    const RegimeRisk r = spectral_risk(1000, 500, 0.8, 0.25, 1.0);
    CHECK(*r.total - *r.excess == doctest::Approx(0.25));
    CHECK(*r.total == doctest::Approx(0.04 + 0.25 * 500 * 0.64 / 499 + 0.25));
  }
  SUBCASE("Monte Carlo oracle in both regimes") {
    // (n, p) pairs on each side of the threshold, away from it.
    const std::vector<std::pair<Eigen::Index, Eigen::Index>> cases = {{50, 20}, {20, 50}};
    for (const auto& [n, p] : cases) {
      SweepConfig cfg;
      cfg.kind = SweepKind::Samples;
      cfg.grid = {n};
      cfg.fixed.p = p;
      cfg.fixed.sigma2 = 0.25;
      cfg.estimator = EstimatorKind::DropoutSpectral;
      cfg.gamma_policy = GammaPolicy::fixed(0.7);
      cfg.trials = 10000;
      cfg.master_seed = 4242;
      const RiskPoint pt = run_sample_sweep(cfg).points.at(0);
      const double closed = *spectral_risk(n, p, 0.7, 0.25, 1.0).excess;
      CHECK(std::abs(pt.emp_excess_mean - closed) <= 3.0 * pt.emp_excess_se);
    }
  }
}

TEST_CASE("spectral_optimal") {
  SUBCASE("overparameterized example") {
    const SpectralOptimum o = spectral_optimal(1000, 500, 0.25, 1.0);
    CHECK(o.gamma_opt == doctest::Approx(499.0 / 624.0).epsilon(1e-12));
  }
  SUBCASE("underparameterized example") {
    const SpectralOptimum o = spectral_optimal(100, 500, 0.25, 1.0);
    CHECK(o.gamma_opt == doctest::Approx(399.0 / 524.0).epsilon(1e-12));
    CHECK(*o.risk.total == doctest::Approx(1.25 - 100.0 / (500.0 * (1.0 + 125.0 / 399.0))).epsilon(1e-12));
  }
  SUBCASE("noiseless") {
    const SpectralOptimum o = spectral_optimal(300, 100, 0.0, 1.0);
    CHECK(o.gamma_opt == 1.0);
    CHECK(*o.risk.total == doctest::Approx(0.0));
  }
  SUBCASE("threshold") { CHECK_THROWS_AS(spectral_optimal(500, 500, 0.25, 1.0), UndefinedRegimeError); }
  SUBCASE("golden-section minimizer of spectral_risk agrees on random tuples") {
    std::mt19937_64 eng(5);
    std::uniform_int_distribution<int> dim(3, 400);
    std::uniform_real_distribution<double> unit(0.05, 2.0);
    int checked = 0;
    while (checked < 100) {
      const Eigen::Index n = dim(eng), p = dim(eng);
      if (classify_regime(n, p) == Regime::Threshold) continue;
      const double s2 = unit(eng), b2 = unit(eng);
      const SpectralOptimum o = spectral_optimal(n, p, s2, b2);
      const double g = testing::golden_min([&](double x) { return *spectral_risk(n, p, x, s2, b2).total; }, 0.0, 1.0);
      CHECK(o.gamma_opt == doctest::Approx(g).epsilon(1e-6));
      const double at = *o.risk.total;
      CHECK(*spectral_risk(n, p, std::min(1.0, o.gamma_opt + 1e-3), s2, b2).total >= at);
      CHECK(*spectral_risk(n, p, o.gamma_opt - 1e-3, s2, b2).total >= at);
      ++checked;
    }
  }
}

TEST_CASE("taylor_risk") {
  CHECK(taylor_risk(1000, 500, 0.0, 1.7) == 1.7);
  CHECK(taylor_risk(2000, 500, 0.05, 1.0) < taylor_risk(1000, 500, 0.05, 1.0));
  // Term-by-term evaluation of the polynomial at n=1000, p=500, alpha=0.1.
  const double n = 1000, p = 500, a = 0.1;
  const double ref = (1 - 2 * a + a * a * (p / n) * (3 + 2 / (n - 2))) + a * a * p / (n - 2) +
                     a * a * a * (p / (n - 2)) * ((p - 1) / n + 1) +
                     a * a * a * a * (4 * p * p - 2 * p - 1 + n) / (n * (n - 2));
  CHECK(taylor_risk(1000, 500, 0.1, 1.0) == doctest::Approx(ref).epsilon(1e-14));
  CHECK(taylor_risk(1000, 500, 0.1, 1.0) == doctest::Approx(0.820871).epsilon(1e-6));
  CHECK(taylor_alpha_limit(1000, 500) == doctest::Approx(1.0 / std::pow(1 + std::sqrt(0.5), 2)));
  CHECK_THROWS_AS(taylor_risk(1000, 500, 0.5, 1.0), DomainError);
  CHECK_THROWS_AS(taylor_risk(1000, 500, -0.01, 1.0), DomainError);
  CHECK_THROWS_AS(taylor_risk(2, 1, 0.01, 1.0), DomainError);
}

TEST_CASE("modelwise risk: reductions") {
  CHECK(modelwise_risk_given_spectrum(Vector(), Vector(), Vector(), 10, 0.3, 2.0) == doctest::Approx(2.3));
  CHECK(modelwise_risk_given_spectrum(Vector::Ones(6), Vector::Ones(6), Vector::Zero(6), 6, 0.3, 2.0) ==
        doctest::Approx(0.3 + 6 * 0.3));
  CHECK_THROWS_AS(modelwise_risk_given_spectrum(Vector::Zero(2), Vector::Ones(2), Vector::Zero(2), 4, 0.3, 1.0),
                  SingularityError);
}

TEST_CASE("modelwise optimal alpha minimizes each term of the risk") {
  const Eigen::Index k = 10, p = 20;
  const double sigma2 = 0.25, theta2 = 1.0;
  const ModelwiseAlpha ma = modelwise_optimal_alpha(Vector::Constant(k, 50.0), k, p, sigma2, theta2);
  CHECK(ma.sigma_tilde2 == doctest::Approx(0.75));
  CHECK(ma.alpha(0) == doctest::Approx(0.3));

  // One-dimensional numeric minimization of the risk in alpha_0 at a sampled spectrum.
  const Vector q = (testing::gaussian(50, k, 8).transpose() * testing::gaussian(50, k, 8)).diagonal();
  const Vector h = Vector::Constant(k, 50.0);
  auto risk_at = [&](double a0) {
    Vector a = ma.alpha;
    a(0) = a0;
    return modelwise_risk_given_spectrum(q, h, a, p, sigma2, theta2);
  };
  CHECK(testing::golden_min(risk_at, 0.0, 5.0) == doctest::Approx(ma.alpha(0)).epsilon(1e-5));
  CHECK(modelwise_risk_given_spectrum(q, h, ma.alpha, p, sigma2, theta2) ==
        doctest::Approx(modelwise_optimal_risk_given_spectrum(q, k, p, sigma2, theta2)).epsilon(1e-12));

  // Full model: alpha_i h_i is the optimal ridge penalty.
  const ModelwiseAlpha full = modelwise_optimal_alpha(Vector::Constant(p, 3.0), p, p, sigma2, theta2);
  CHECK(full.alpha(4) * 3.0 == doctest::Approx(ridge_optimal_lambda(p, sigma2, theta2)));
  const ModelwiseAlpha clean = modelwise_optimal_alpha(Vector::Constant(p, 3.0), p, p, 0.0, theta2);
  CHECK(clean.alpha.isZero());
  CHECK_THROWS_AS(modelwise_optimal_alpha(h, k, p, sigma2, 0.0), DomainError);
}

TEST_CASE("modelwise risk formula agrees with Monte Carlo over projection, design and noise") {
  // Uniform alpha exercises the bias term away from the optimum.
  SweepConfig cfg;
  cfg.kind = SweepKind::Model;
  cfg.grid = {4, 10};
  cfg.fixed.n = 50;
  cfg.fixed.p = 20;
  cfg.fixed.sigma2 = 0.25;
  cfg.estimator = EstimatorKind::DropoutDiagonal;
  cfg.trials = 6000;
  cfg.master_seed = 99;
  for (const GammaPolicy& policy : {GammaPolicy::optimal(), GammaPolicy::fixed(0.5)}) {
    cfg.gamma_policy = policy;
    for (const RiskPoint& pt : run_model_sweep(cfg).points) {
      REQUIRE(pt.theory_excess.has_value());
      CHECK(std::abs(pt.emp_excess_mean - *pt.theory_excess) <= 3.0 * pt.emp_excess_se);
    }
  }
}

TEST_CASE("modelwise optimal risk decreases along interlaced spectra") {
  // Eigenvalues of nested Gram matrices X_k^T X_k interlace as columns are added.
  const Matrix x = testing::gaussian(50, 20, 31);
  double prev = modelwise_optimal_risk_given_spectrum(Vector(), 0, 20, 0.25, 1.0);
  for (Eigen::Index k = 1; k <= 20; ++k) {
    const Matrix g = x.leftCols(k).transpose() * x.leftCols(k);
    const Vector q = Eigen::SelfAdjointEigenSolver<Matrix>(g).eigenvalues();
    const double r = modelwise_optimal_risk_given_spectrum(q, k, 20, 0.25, 1.0);
    CHECK(r <= prev + 1e-10);
    prev = r;
  }
  CHECK(modelwise_optimal_risk_given_spectrum(Vector::Constant(3, 1e15), 3, 20, 0.25, 1.0) ==
        doctest::Approx(modelwise_sigma_tilde2(3, 20, 0.25, 1.0)));
}

TEST_CASE("Marchenko-Pastur Stieltjes transform") {
  CHECK(mp_stieltjes(1.0, 1.0) == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-14));
  CHECK(mp_stieltjes(0.5, 1e9) < 1e-8);
  CHECK(mp_stieltjes(1e-9, 0.7) == doctest::Approx(1.0 / 1.7).epsilon(1e-7));
  for (double c : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    for (double l : {0.01, 0.3, 1.0, 10.0}) {
      const double h = 1e-6;
      // d/dz m(z) at z = -l is -(d/dl) m(-l).
      const double fd = -(mp_stieltjes(c, l + h) - mp_stieltjes(c, l - h)) / (2 * h);
      CHECK(mp_stieltjes_derivative(c, l) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("asymptotic risk and optimum") {
  CHECK(asymptotic_risk(0.7, 1e8, 0.25, 1.3) == doctest::Approx(1.55).epsilon(1e-6));
  const AsymptoticOptimum o = asymptotic_optimal(0.5, 0.25, 1.0);
  CHECK(o.lambda == doctest::Approx(0.125));
  CHECK(asymptotic_risk(0.5, 0.125, 0.25, 1.0) == doctest::Approx(o.risk).epsilon(1e-10));
  const double l = testing::golden_min([](double x) { return asymptotic_risk(0.5, x, 0.25, 1.0); }, 1e-4, 5.0);
  CHECK(l == doctest::Approx(0.125).epsilon(1e-5));

  const AsymptoticOptimum one = asymptotic_optimal(1.0, 0.25, 1.0);
  CHECK(one.gamma_hat == doctest::Approx(0.8));
  CHECK(one.risk == doctest::Approx(0.25 + (-0.25 + std::sqrt(0.0625 + 1.0)) / 2).epsilon(1e-12));

  CHECK(asymptotic_optimal(0.5, 0.0, 1.0).risk == doctest::Approx(0.0));
  CHECK(asymptotic_optimal(0.5, 0.0, 1.0).gamma_hat == 1.0);
  CHECK(asymptotic_optimal(0.5, 0.25, 1.0).risk < asymptotic_optimal(1.0, 0.25, 1.0).risk);
  CHECK(asymptotic_optimal(1.0, 0.25, 1.0).risk < asymptotic_optimal(2.0, 0.25, 1.0).risk);
  CHECK_THROWS_AS(asymptotic_optimal(1.0, 0.25, 0.0), DomainError);
}
