#pragma once

// Hot loops, each with a serial reference and an OpenMP version that must
// produce bit-identical results. Work is cut into fixed-size blocks whose
// seeds and reduction order do not depend on the thread count.

#include <cstdint>
#include <exception>
#include <type_traits>
#include <vector>

#include "ddlab/linalg.hpp"
#include "ddlab/rng.hpp"

namespace ddlab::kernels {

inline constexpr std::int64_t kMaskBlock = 1024;

/// Running mean and sum of squared deviations (Welford), mergeable in a fixed order.
struct Moments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double v);
  void merge(const Moments& other);
  double standard_error() const;
};

/// Moments of || y - (R * X) beta ||^2 for R with i.i.d. Bernoulli(gamma) entries.
/// Block b draws its masks from derive(seed, "mask-block", b).
Moments mask_objective_serial(const Matrix& x, const Vector& y, const Vector& beta, double gamma,
                              std::int64_t n_masks, Seed seed);
Moments mask_objective_omp(const Matrix& x, const Vector& y, const Vector& beta, double gamma,
                           std::int64_t n_masks, Seed seed, int threads);

/// Moments of sum_i || y_i - B_i a_i ||^2 where B_i is diagonal with entries
/// (1/gamma) Bernoulli(gamma), drawn independently for each sample i.
/// y has either D columns (elementwise targets) or one column (the target is
/// compared with the sum of the masked features).
Moments feature_mask_serial(const Matrix& a, const Matrix& y, double gamma, std::int64_t n_masks,
                            Seed seed);
Moments feature_mask_omp(const Matrix& a, const Matrix& y, double gamma, std::int64_t n_masks,
                         Seed seed, int threads);

/// Calls fn(i) for i in [0, count) and returns the results in index order.
template <class Fn>
auto map_serial(std::int64_t count, Fn&& fn) {
  using R = std::decay_t<decltype(fn(std::int64_t{0}))>;
  std::vector<R> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) out.push_back(fn(i));
  return out;
}

template <class Fn>
auto map_omp(std::int64_t count, int threads, Fn&& fn) {
  using R = std::decay_t<decltype(fn(std::int64_t{0}))>;
  std::vector<R> out(static_cast<std::size_t>(count));
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads > 0 ? threads : 1)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(i);
    } catch (...) {
#pragma omp critical(ddlab_map_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

template <class Fn>
auto map_indices(std::int64_t count, int threads, Fn&& fn) {
  if (threads <= 1) return map_serial(count, fn);
  return map_omp(count, threads, fn);
}

/// Pairwise summation; the tree depends only on the length.
double pairwise_sum(const double* v, std::int64_t n);
inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), static_cast<std::int64_t>(v.size()));
}

}  // namespace ddlab::kernels
