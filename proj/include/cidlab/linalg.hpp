#pragma once

// Small dense positive-definite solves backing the joint-density routines.
// Sizes stay tiny (joint densities cap at 50 observations), so a plain packed
// Cholesky without pivoting or blocking is the right tool.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cidlab/common.hpp"

namespace cidlab {

// Lower-triangular Cholesky of a symmetric positive-definite matrix stored
// dense row-major. Overwrites the lower triangle with L; callers must ignore
// the strict upper triangle afterwards.
inline void cholesky_in_place(std::vector<double>& a, std::size_t n) {
  if (a.size() != n * n) throw error("matrix storage does not match its order");
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) throw error("matrix is not positive definite");
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
}

// Solves L y = b in place for lower-triangular L (as produced above).
inline void solve_lower_in_place(const std::vector<double>& l, std::size_t n,
                                 std::vector<double>& b) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
    b[i] = s / l[i * n + i];
  }
}

// Log density of N(mean, cov) at x. The covariance is passed by value and
// consumed by the factorization.
inline double gaussian_log_density(std::vector<double> cov, std::size_t n,
                                   std::span<const double> mean,
                                   std::span<const double> x) {
  cholesky_in_place(cov, n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - mean[i];
  solve_lower_in_place(cov, n, y);
  double log_det = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    log_det += 2.0 * std::log(cov[i * n + i]);
    quad += y[i] * y[i];
  }
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * kPi) + log_det + quad);
}

}  // namespace cidlab
