#pragma once

// Independent reference implementations used only by the tests. These must
// not share numeric code paths with the library: quadrature is adaptive
// Simpson (the library integrates on fixed trapezoid grids), CDFs come from
// closed forms, and sampling uses std::mt19937_64 rather than the library's
// counter-based generator.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

inline double phi(double x, double mean = 0.0, double sd = 1.0) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
}

inline double Phi(double x, double mean = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

namespace detail {
inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth, int force) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 ||
      (force <= 0 && std::abs(left + right - whole) <= 15.0 * tol))
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1,
                     force - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1,
                     force - 1);
}
}  // namespace detail

// Adaptive Simpson quadrature. The first few levels always subdivide so a
// bump much narrower than the interval cannot slip between the coarse
// samples and fake early convergence.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48, 6);
}

// TV between two normals via quadrature of |phi1 - phi2| / 2.
inline double tv_normals(double m1, double s1, double m2, double s2) {
  const double lo = std::min(m1 - 10.0 * s1, m2 - 10.0 * s2);
  const double hi = std::max(m1 + 10.0 * s1, m2 + 10.0 * s2);
  return 0.5 * integrate(
                   [&](double x) {
                     return std::abs(phi(x, m1, s1) - phi(x, m2, s2));
                   },
                   lo, hi, 1e-10);
}

// TV between two equal-variance normals in closed form: 2*Phi(|d|/2s) - 1.
inline double tv_normals_equal_var(double m1, double m2, double s) {
  return 2.0 * Phi(std::abs(m1 - m2) / (2.0 * s)) - 1.0;
}

// Monte Carlo TV estimate via importance sampling under the first normal:
// TV = E_f |1 - g(X)/f(X)| / 2. Returns {estimate, stderr}.
struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

inline McEstimate tv_normals_mc(double m1, double s1, double m2, double s2,
                                std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(m1, s1);
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = dist(gen);
    const double w = 0.5 * std::abs(1.0 - phi(x, m2, s2) / phi(x, m1, s1));
    sum += w;
    sumsq += w * w;
  }
  const double mean = sum / static_cast<double>(n);
  const double var =
      (sumsq - sum * mean) / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

// Dense-grid Kolmogorov distance between closed-form CDFs, also probing the
// left limits at the given jump points.
inline double kolmogorov_dense(const std::function<double(double)>& F1,
                               const std::function<double(double)>& F2,
                               double lo, double hi, std::size_t points,
                               const std::vector<double>& jumps = {}) {
  double sup = 0.0;
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + step * static_cast<double>(i);
    sup = std::max(sup, std::abs(F1(x) - F2(x)));
  }
  for (double x : jumps) {
    const double eps = 1e-9 * (1.0 + std::abs(x));
    sup = std::max(sup, std::abs(F1(x) - F2(x)));
    sup = std::max(sup, std::abs(F1(x - eps) - F2(x - eps)));
  }
  return sup;
}

// Expected number of rows a sliding-window scan needs to see the n x n
// identity pattern in fair-coin rows, by first passage of the match-progress
// chain. States k = 0..n-1 (longest matched prefix), absorption at n. From
// state k the next row extends the match with probability 2^-n, restarts at
// state 1 if it equals the first pattern row (distinct from the extending row
// whenever k >= 1), and otherwise drops to 0. Solved by back-substitution.
inline double expected_rows_identity_scan(int n) {
  const double p = std::pow(2.0, -n);
  // E_k = 1 + sum_j P(k->j) E_j. Solve the small linear system by Gaussian
  // elimination on the (n x n) matrix over states 0..n-1.
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (int k = 0; k < n; ++k) {
    a[k][k] += 1.0;
    a[k][n] = 1.0;
    // transition into k+1 (absorbing when k+1 == n contributes E=0)
    if (k + 1 < n) a[k][k + 1] -= p;
    // restart transitions
    if (k == 0) {
      a[k][0] -= 1.0 - p;  // everything except the extending row
    } else {
      a[k][1] -= p;              // row equals the first pattern row
      a[k][0] -= 1.0 - 2.0 * p;  // any other row
    }
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double factor = a[r][col] / a[col][col];
      for (int c = col; c <= n; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  return a[0][n] / a[0][0];
}

}  // namespace oracle
