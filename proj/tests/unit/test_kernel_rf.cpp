#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "ddlab/error.hpp"
#include "ddlab/kernel_rf.hpp"
#include "helpers.hpp"

using namespace ddlab;

namespace {

KernelSystem system_from(const Matrix& k, std::uint64_t seed, double sigma2 = 0.25) {
  return {k, testing::gaussian_vector(k.rows(), seed), sigma2};
}

}  // namespace

TEST_CASE("relu_embed") {
  FeatureWeights id{Matrix::Identity(4, 4)};
  CHECK(relu_embed(Matrix::Identity(4, 4), id) == Matrix::Identity(4, 4));
  CHECK(relu_embed(-Matrix::Identity(4, 4), id).isZero());

  const Matrix x = testing::gaussian(100, 10, 1);
  const FeatureWeights w{testing::gaussian(50, 10, 2)};
  const Matrix a = relu_embed(x, w);
  CHECK(a.minCoeff() >= 0.0);
  CHECK(testing::max_abs_diff(a, (x * w.w.transpose()).cwiseMax(0.0)) == 0.0);
  const double zeros = static_cast<double>((a.array() == 0.0).count()) / static_cast<double>(a.size());
  // 5000 near-independent fair coins: sd of the fraction is about 0.007.
  CHECK(std::abs(zeros - 0.5) < 3 * 0.5 / std::sqrt(5000.0) * 2);
  CHECK_THROWS_AS(relu_embed(testing::gaussian(5, 9, 3), w), DimensionError);
}

TEST_CASE("feature_dropout_identity") {
  const Matrix a = testing::gaussian(8, 5, 4).cwiseAbs();
  const Matrix y = testing::gaussian(8, 5, 5);

  const FeatureDropoutCheck one = feature_dropout_identity(a, y, 1.0, 100, 1);
  CHECK(one.closed == doctest::Approx((y - a).squaredNorm()));
  CHECK(one.mc_se == 0.0);

  const FeatureDropoutCheck zero = feature_dropout_identity(Matrix::Zero(8, 5), y, 0.3, 100, 1);
  CHECK(zero.closed == doctest::Approx(y.squaredNorm()));

  const FeatureDropoutCheck mc = feature_dropout_identity(a, y, 0.7, 1000000, 6, 2);
  CHECK(mc.closed == doctest::Approx((y - a).squaredNorm() + 0.3 / 0.7 * a.squaredNorm()));
  CHECK(std::abs(mc.closed - mc.mc_mean) <= 3.0 * mc.mc_se);

  // Summed target: E || y_i - 1^T B a_i ||^2 has the same penalty.
  const Matrix ys = testing::gaussian(8, 1, 7);
  const FeatureDropoutCheck sum = feature_dropout_identity(a, ys, 0.6, 400000, 8);
  CHECK(sum.closed == doctest::Approx((ys.col(0) - a.rowwise().sum()).squaredNorm() + 0.4 / 0.6 * a.squaredNorm()));
  CHECK(std::abs(sum.closed - sum.mc_mean) <= 3.0 * sum.mc_se);

  const FeatureDropoutCheck s1 = feature_dropout_identity(a, y, 0.5, 3000, 9, 1);
  const FeatureDropoutCheck s4 = feature_dropout_identity(a, y, 0.5, 3000, 9, 4);
  CHECK(s1.mc_mean == s4.mc_mean);
  CHECK(s1.mc_se == s4.mc_se);
}

TEST_CASE("kernel_matrix") {
  CHECK(kernel_matrix(Matrix::Identity(3, 3)) == Matrix::Identity(3, 3));
  const Vector f = testing::gaussian_vector(6, 10);
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(kernel_matrix(f)).eigenvalues();
  CHECK(ev(5) == doctest::Approx(f.squaredNorm()));
  CHECK(ev.head(5).cwiseAbs().maxCoeff() < 1e-10);
  const Matrix k = kernel_matrix(testing::gaussian(20, 8, 11));
  const Vector kv = Eigen::SelfAdjointEigenSolver<Matrix>(k).eigenvalues();
  CHECK(kv.minCoeff() >= -1e-8 * kv.maxCoeff());
}

TEST_CASE("krr_fit") {
  const Vector y = testing::gaussian_vector(5, 12);
  const KernelSystem ident{Matrix::Identity(5, 5), Vector::Zero(5), 0.0};
  CHECK(testing::max_abs_diff(krr_fit(ident, y, 0.5), y / 2.0) < 1e-14);
  CHECK(krr_fit(ident, y, 1e-9).norm() < 1e-8);

  const KernelSystem sys = system_from(testing::random_psd(30, 40, 13), 14);
  const Vector y30 = testing::gaussian_vector(30, 15);
  const double lambda = 0.25;  // gamma = 0.8
  Matrix shifted = sys.k;
  shifted.diagonal().array() += lambda;
  const Vector cg = testing::conjugate_gradient(shifted, y30);
  const Vector fit = krr_fit(sys, y30, 0.8);
  CHECK(testing::max_abs_diff(fit, cg) < 1e-8);
  CHECK((shifted * fit - y30).norm() <= 1e-8 * y30.norm());

  // gamma = 1 on an invertible kernel interpolates.
  CHECK((sys.k * krr_fit(sys, y30, 1.0) - y30).norm() < 1e-8 * y30.norm());
  CHECK_THROWS_AS(krr_fit(sys, y, 0.8), DimensionError);
}

TEST_CASE("krr_insample_risk") {
  SUBCASE("no penalty on an invertible kernel is sigma2 n") {
    const KernelSystem sys = system_from(testing::random_psd(12, 20, 16), 17, 0.3);
    CHECK(krr_insample_risk(sys, 1.0) == doctest::Approx(0.3 * 12));
  }
  SUBCASE("no penalty on a singular kernel is sigma2 rank") {
    const KernelSystem sys = system_from(testing::random_psd(12, 5, 18), 19, 0.3);
    CHECK(krr_insample_risk(sys, 1.0) == doctest::Approx(0.3 * 5));
    CHECK(krr_insample_risk_direct(sys, 1.0) == doctest::Approx(0.3 * 5));
  }
  SUBCASE("scalar spectrum") {
    const double s = 2.0, lambda = 0.5;  // gamma = 2/3
    KernelSystem sys{s * Matrix::Identity(6, 6), Vector::Zero(6), 0.4};
    CHECK(krr_insample_risk(sys, 1.0 / 1.5) == doctest::Approx(0.4 * 6 * s * s / ((s + lambda) * (s + lambda))));
    sys.alpha_star = testing::gaussian_vector(6, 20);
    const double expect = (lambda * lambda * sys.alpha_star.squaredNorm() + 0.4 * 6) * s * s /
                          ((s + lambda) * (s + lambda));
    CHECK(krr_insample_risk(sys, 1.0 / 1.5) == doctest::Approx(expect));
  }
  SUBCASE("eigen path equals the matrix formula") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const KernelSystem sys = system_from(testing::random_psd(30, s % 2 ? 10 : 50, 200 + s), 300 + s);
      for (double g : {0.2, 0.8, 0.99}) {
        const double a = krr_insample_risk(sys, g);
        const double b = krr_insample_risk_direct(sys, g);
        CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(b)));
      }
    }
  }
  SUBCASE("Monte Carlo over the noise") {
    const KernelSystem sys = system_from(testing::random_psd(15, 30, 21), 22, 0.5);
    const double g = 0.6;
    const Vector f = sys.k * sys.alpha_star;
    double acc = 0.0;
    const int reps = 20000;
    std::vector<double> v;
    for (int t = 0; t < reps; ++t) {
      const Vector y = f + std::sqrt(0.5) * testing::gaussian_vector(15, 10000 + static_cast<std::uint64_t>(t));
      const double r = (sys.k * krr_fit(sys, y, g) - f).squaredNorm();
      v.push_back(r);
      acc += r;
    }
    const double mean = acc / reps;
    double ss = 0.0;
    for (double r : v) ss += (r - mean) * (r - mean);
    const double se = std::sqrt(ss / (reps - 1) / reps);
    CHECK(std::abs(mean - krr_insample_risk(sys, g)) <= 3.0 * se);
  }
}

TEST_CASE("krr_optimal") {
  SUBCASE("identity kernel") {
    const KernelSystem sys{Matrix::Identity(4, 4), Vector::Ones(4), 0.25};
    const KrrOptimum o = krr_optimal(sys);
    CHECK(o.inverse_spectrum_risk == doctest::Approx(1.0));
    CHECK(o.retained == 4);
    CHECK(o.lambda_diag.isApproxToConstant(4 * 0.25 / 4.0));
  }
  SUBCASE("doubling the spectrum halves the risk") {
    const KernelSystem a = system_from(testing::random_psd(10, 20, 23), 24);
    KernelSystem b = a;
    b.k *= 2.0;
    CHECK(krr_optimal(b).inverse_spectrum_risk == doctest::Approx(krr_optimal(a).inverse_spectrum_risk / 2.0));
  }
  SUBCASE("each penalty is stationary for its mode term") {
    const KernelSystem sys = system_from(testing::random_psd(30, 50, 25), 26);
    const KrrOptimum o = krr_optimal(sys);
    const double per_mode = sys.alpha_star.squaredNorm() / static_cast<double>(o.retained);
    for (Eigen::Index i = 0; i < o.retained; ++i) {
      const double s = o.spectrum(i), l = o.lambda_diag(i);
      const double at = krr_mode_risk(s, l, per_mode, sys.sigma2);
      CHECK(krr_mode_risk(s, l + 1e-4, per_mode, sys.sigma2) >= at);
      CHECK(krr_mode_risk(s, l - 1e-4, per_mode, sys.sigma2) >= at);
    }
  }
  SUBCASE("rank-deficient kernel keeps the positive part") {
    const KernelSystem sys = system_from(testing::random_psd(12, 4, 27), 28);
    CHECK(krr_optimal(sys).retained == 4);
  }
  SUBCASE("errors") {
    const KernelSystem zero{Matrix::Zero(3, 3), Vector::Ones(3), 0.1};
    CHECK_THROWS_AS(krr_optimal(zero), DegenerateKernelError);
    const KernelSystem still{Matrix::Identity(3, 3), Vector::Zero(3), 0.1};
    CHECK_THROWS_AS(krr_optimal(still), DomainError);
  }
}

TEST_CASE("optimal risk shrinks as kernels are extended by a sample") {
  // More samples than features: both kernels keep the same D modes.
  int increases = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Matrix f = testing::gaussian(21, 10, 400 + s);
    const KernelSystem big = system_from(kernel_matrix(f), 600 + s);
    KernelSystem small{big.k.topLeftCorner(20, 20), big.alpha_star.head(20), big.sigma2};
    if (krr_optimal(big).inverse_spectrum_risk > krr_optimal(small).inverse_spectrum_risk + 1e-10) ++increases;
  }
  CHECK(increases == 0);
}

TEST_CASE("krr_upper_bound") {
  SUBCASE("tight for a constant spectrum") {
    const KernelSystem sys{3.0 * Matrix::Identity(5, 5), testing::gaussian_vector(5, 29), 0.2};
    CHECK(krr_upper_bound(sys, 0.7) == doctest::Approx(krr_insample_risk(sys, 0.7)).epsilon(1e-12));
  }
  SUBCASE("dominates the isotropic risk") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const KernelSystem sys = system_from(testing::random_psd(15, 25, 700 + s), 800 + s);
      for (double g : {0.3, 0.7, 0.95}) CHECK(krr_upper_bound(sys, g) >= krr_insample_risk_isotropic(sys, g) - 1e-12);
    }
  }
  SUBCASE("the bound's penalty minimizes the bound") {
    const KernelSystem sys = system_from(testing::random_psd(16, 30, 900), 1000);
    const double l = krr_bound_lambda(sys);
    const double at = krr_upper_bound(sys, gamma_from_lambda(l));
    for (double f : {0.5, 0.9, 0.999, 1.001, 1.1, 2.0})
      CHECK(krr_upper_bound(sys, gamma_from_lambda(f * l)) >= at);
  }
  CHECK(gamma_from_lambda(0.25) == 0.8);
}
