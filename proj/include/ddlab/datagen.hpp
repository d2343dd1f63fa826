#pragma once

// Synthetic data for the regression experiments. Every generator is a pure
// function of its arguments and seed.

#include <cstdint>
#include <string>
#include <vector>

#include "ddlab/linalg.hpp"
#include "ddlab/rng.hpp"

namespace ddlab {

/// Design X (rows are samples), responses y, ground truth and noise variance.
struct RegressionDataset {
  Matrix x;
  Vector y;
  Vector beta_star;
  double sigma2 = 0.0;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
};

/// k x p matrix with orthonormal rows.
struct ProjectionPair {
  Matrix q;
  Eigen::Index k() const { return q.rows(); }
};

/// D x d random first-layer weights, entries N(0, 1/d).
struct FeatureWeights {
  Matrix w;
  Eigen::Index d() const { return w.cols(); }
  Eigen::Index features() const { return w.rows(); }
};

/// Entries U(0,1), rescaled to unit Euclidean norm.
Vector sample_beta_star(Eigen::Index p, Seed seed);

/// X ~ N(0,1) entrywise, y = X beta + eps with eps ~ N(0, sigma2).
RegressionDataset generate_dataset(Eigen::Index n, Eigen::Index p, const Vector& beta_star,
                                   double sigma2, Seed seed);

/// First k rows of the Haar orthogonal factor of a p x p Gaussian matrix.
ProjectionPair sample_projection(Eigen::Index k, Eigen::Index p, Seed seed);

FeatureWeights sample_feature_weights(Eigen::Index features, Eigen::Index d, Seed seed);

/// Standard Gaussian matrix; shared by the generators above.
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Engine& engine);

}  // namespace ddlab
