#include "ddlab/datagen.hpp"

#include <cmath>
#include <string>

#include "ddlab/error.hpp"

namespace ddlab {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Engine& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(engine);
  return m;
}

Vector sample_beta_star(Eigen::Index p, Seed seed) {
  if (p < 1) throw DimensionError("sample_beta_star: p must be >= 1");
  Engine engine(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vector beta(p);
  double norm2 = 0.0;
  do {
    for (Eigen::Index i = 0; i < p; ++i) beta(i) = uniform(engine);
    norm2 = beta.squaredNorm();
  } while (norm2 == 0.0);
  return beta / std::sqrt(norm2);
}

RegressionDataset generate_dataset(Eigen::Index n, Eigen::Index p, const Vector& beta_star,
                                   double sigma2, Seed seed) {
  if (n < 1 || p < 1) throw DimensionError("generate_dataset: n and p must be >= 1");
  if (beta_star.size() != p)
    throw DimensionError("generate_dataset: beta_star has length " +
                         std::to_string(beta_star.size()) + ", expected p = " + std::to_string(p));
  if (!(sigma2 >= 0.0)) throw DomainError("generate_dataset: sigma2 must be >= 0");

  Engine engine(seed);
  RegressionDataset ds;
  ds.x = gaussian_matrix(n, p, engine);
  ds.beta_star = beta_star;
  ds.sigma2 = sigma2;
  ds.y = ds.x * beta_star;
  if (sigma2 > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(sigma2));
    for (Eigen::Index i = 0; i < n; ++i) ds.y(i) += noise(engine);
  }
  return ds;
}

ProjectionPair sample_projection(Eigen::Index k, Eigen::Index p, Seed seed) {
  if (k < 1 || p < 1) throw DimensionError("sample_projection: k and p must be >= 1");
  if (k > p)
    throw DimensionError("sample_projection: k = " + std::to_string(k) + " exceeds p = " +
                         std::to_string(p));
  Engine engine(seed);
  const Matrix g = gaussian_matrix(p, p, engine);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(p, p);
  const Matrix& r = qr.matrixQR();
  // Sign fix on diag(R) makes Q Haar distributed.
  for (Eigen::Index j = 0; j < p; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return ProjectionPair{q.leftCols(k).transpose()};
}

FeatureWeights sample_feature_weights(Eigen::Index features, Eigen::Index d, Seed seed) {
  if (features < 1 || d < 1)
    throw DimensionError("sample_feature_weights: D and d must be >= 1");
  Engine engine(seed);
  return FeatureWeights{gaussian_matrix(features, d, engine) / std::sqrt(static_cast<double>(d))};
}

}  // namespace ddlab
