#include "ddlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ddlab::kernels {

void Moments::push(double v) {
  ++count;
  const double delta = v - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (v - mean);
}

void Moments::merge(const Moments& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count);
  const double nb = static_cast<double>(other.count);
  const double n = na + nb;
  const double delta = other.mean - mean;
  mean += delta * (nb / n);
  m2 += other.m2 + delta * delta * (na * nb / n);
  count += other.count;
}

double Moments::standard_error() const {
  if (count < 2) return 0.0;
  const double var = m2 / static_cast<double>(count - 1);
  return std::sqrt(std::max(var, 0.0) / static_cast<double>(count));
}

namespace {

std::int64_t block_count(std::int64_t n_masks) { return (n_masks + kMaskBlock - 1) / kMaskBlock; }

std::int64_t block_size(std::int64_t b, std::int64_t n_masks) {
  return std::min(kMaskBlock, n_masks - b * kMaskBlock);
}

Moments mask_block(const Matrix& x, const Vector& y, const Vector& beta, double gamma,
                   std::int64_t masks, Seed seed) {
  Engine engine(seed);
  std::bernoulli_distribution keep(gamma);
  Moments m;
  const Eigen::Index n = x.rows(), p = x.cols();
  for (std::int64_t s = 0; s < masks; ++s) {
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double pred = 0.0;
      for (Eigen::Index j = 0; j < p; ++j)
        if (keep(engine)) pred += x(i, j) * beta(j);
      const double r = y(i) - pred;
      obj += r * r;
    }
    m.push(obj);
  }
  return m;
}

Moments feature_block(const Matrix& a, const Matrix& y, double gamma, std::int64_t masks,
                      Seed seed) {
  Engine engine(seed);
  std::bernoulli_distribution keep(gamma);
  const double scale = 1.0 / gamma;
  const bool summed = y.cols() == 1 && a.cols() != 1;
  Moments m;
  const Eigen::Index n = a.rows(), d = a.cols();
  for (std::int64_t s = 0; s < masks; ++s) {
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (summed) {
        double pred = 0.0;
        for (Eigen::Index j = 0; j < d; ++j)
          if (keep(engine)) pred += scale * a(i, j);
        const double r = y(i, 0) - pred;
        obj += r * r;
      } else {
        for (Eigen::Index j = 0; j < d; ++j) {
          const double r = y(i, j) - (keep(engine) ? scale * a(i, j) : 0.0);
          obj += r * r;
        }
      }
    }
    m.push(obj);
  }
  return m;
}

template <class Block>
Moments run_serial(std::int64_t n_masks, Seed seed, Block&& block) {
  Moments total;
  for (std::int64_t b = 0; b < block_count(n_masks); ++b)
    total.merge(block(block_size(b, n_masks), derive(seed, "mask-block", b)));
  return total;
}

template <class Block>
Moments run_omp(std::int64_t n_masks, Seed seed, int threads, Block&& block) {
  const std::int64_t blocks = block_count(n_masks);
  std::vector<Moments> parts(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads > 0 ? threads : 1)
  for (std::int64_t b = 0; b < blocks; ++b)
    parts[static_cast<std::size_t>(b)] = block(block_size(b, n_masks), derive(seed, "mask-block", b));
  Moments total;
  for (const Moments& m : parts) total.merge(m);
  return total;
}

}  // namespace

Moments mask_objective_serial(const Matrix& x, const Vector& y, const Vector& beta, double gamma,
                              std::int64_t n_masks, Seed seed) {
  return run_serial(n_masks, seed, [&](std::int64_t masks, Seed s) {
    return mask_block(x, y, beta, gamma, masks, s);
  });
}

Moments mask_objective_omp(const Matrix& x, const Vector& y, const Vector& beta, double gamma,
                           std::int64_t n_masks, Seed seed, int threads) {
  return run_omp(n_masks, seed, threads, [&](std::int64_t masks, Seed s) {
    return mask_block(x, y, beta, gamma, masks, s);
  });
}

Moments feature_mask_serial(const Matrix& a, const Matrix& y, double gamma, std::int64_t n_masks,
                            Seed seed) {
  return run_serial(n_masks, seed, [&](std::int64_t masks, Seed s) {
    return feature_block(a, y, gamma, masks, s);
  });
}

Moments feature_mask_omp(const Matrix& a, const Matrix& y, double gamma, std::int64_t n_masks,
                         Seed seed, int threads) {
  return run_omp(n_masks, seed, threads, [&](std::int64_t masks, Seed s) {
    return feature_block(a, y, gamma, masks, s);
  });
}

double pairwise_sum(const double* v, std::int64_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::int64_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace ddlab::kernels
