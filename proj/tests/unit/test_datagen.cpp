#include <cmath>

#include "doctest.h"
#include "ddlab/datagen.hpp"
#include "ddlab/error.hpp"
#include "ddlab/rng.hpp"
#include "helpers.hpp"

using namespace ddlab;

TEST_CASE("splitmix64 and fnv1a match their published reference values") {
  // First output of the SplitMix64 generator seeded with 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("derived seeds separate tags and indices") {
  static_assert(derive(1, "samples", 0, 0) == derive(1, "samples", 0, 0));
  CHECK(derive(1, "samples") != derive(1, "model"));
  CHECK(derive(1, "samples", 0, 1) != derive(1, "samples", 1, 0));
  CHECK(derive(1, "samples", 3) == mix(derive(1, "samples"), 3));
  CHECK(derive(1, "samples", 3, 4) == mix(mix(mix(1, fnv1a("samples")), 3), 4));
}

TEST_CASE("sample_beta_star has unit norm and nonnegative entries") {
  const Vector b = sample_beta_star(50, 7);
  CHECK(b.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b.minCoeff() >= 0.0);
  CHECK((sample_beta_star(50, 7) - b).norm() == 0.0);
  CHECK((sample_beta_star(50, 8) - b).norm() > 0.0);
  CHECK_THROWS_AS(sample_beta_star(0, 1), DimensionError);
}

TEST_CASE("generate_dataset: y = X beta + noise with the requested variance") {
  const Vector beta = sample_beta_star(3, 1);
  const RegressionDataset clean = generate_dataset(40, 3, beta, 0.0, 2);
  CHECK((clean.y - clean.x * beta).norm() < 1e-12);
  CHECK(clean.n() == 40);
  CHECK(clean.p() == 3);

  const RegressionDataset noisy = generate_dataset(20000, 3, beta, 0.25, 3);
  const Vector eps = noisy.y - noisy.x * beta;
  const double var = eps.squaredNorm() / static_cast<double>(eps.size());
  // sd of the sample variance is about sigma2 * sqrt(2/n) = 0.0025.
  CHECK(var == doctest::Approx(0.25).epsilon(0.04));
  const double xvar = noisy.x.squaredNorm() / static_cast<double>(noisy.x.size());
  CHECK(xvar == doctest::Approx(1.0).epsilon(0.03));

  CHECK_THROWS_AS(generate_dataset(10, 4, beta, 0.1, 1), DimensionError);
  CHECK_THROWS_AS(generate_dataset(10, 3, beta, -1.0, 1), DomainError);
}

TEST_CASE("sample_projection has orthonormal rows") {
  const ProjectionPair pr = sample_projection(7, 12, 11);
  CHECK(pr.k() == 7);
  CHECK(pr.q.cols() == 12);
  CHECK(testing::max_abs_diff(pr.q * pr.q.transpose(), Matrix::Identity(7, 7)) < 1e-12);
  const ProjectionPair full = sample_projection(12, 12, 11);
  CHECK(testing::max_abs_diff(full.q.transpose() * full.q, Matrix::Identity(12, 12)) < 1e-12);
  CHECK_THROWS_AS(sample_projection(13, 12, 1), DimensionError);
}

TEST_CASE("projection rows are isotropic on average") {
  // For a Haar k x p projection, E[Q^T Q] = (k/p) I.
  const int reps = 400;
  Matrix acc = Matrix::Zero(6, 6);
  for (int r = 0; r < reps; ++r) {
    const Matrix q = sample_projection(2, 6, derive(5, "iso", static_cast<std::uint64_t>(r))).q;
    acc += q.transpose() * q;
  }
  acc /= reps;
  CHECK(testing::max_abs_diff(acc, (2.0 / 6.0) * Matrix::Identity(6, 6)) < 0.08);
}

TEST_CASE("feature weights have variance 1/d") {
  const FeatureWeights w = sample_feature_weights(400, 25, 9);
  CHECK(w.features() == 400);
  CHECK(w.d() == 25);
  const double var = w.w.squaredNorm() / static_cast<double>(w.w.size());
  CHECK(var == doctest::Approx(1.0 / 25.0).epsilon(0.03));
}
