#pragma once

// Random-weight binary expansion: U_m uniform on (1/(m+1), 1/m), V_m = U_m^m,
// and observations X_i = sum_m V_m Y_{m,i} over fair coins Y. The weights
// decay super-exponentially, which is what makes the limit law singular; the
// sure bracketing (m+1)^{-m} < V_m < m^{-m} drives every bound used here.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "cidlab/common.hpp"
#include "cidlab/grid_density.hpp"
#include "cidlab/mixed_measure.hpp"
#include "cidlab/models/model_spec.hpp"
#include "cidlab/rng.hpp"

namespace cidlab::singular {

struct WeightSequence {
  std::vector<double> values;  // values[m-1] = V_m
  int depth = 0;

  double at(int m) const { return values[static_cast<std::size_t>(m) - 1]; }
};

inline double weight_lower_bound(int m) {
  return std::pow(static_cast<double>(m) + 1.0, -static_cast<double>(m));
}

inline double weight_upper_bound(int m) {
  return std::pow(static_cast<double>(m), -static_cast<double>(m));
}

// Closed bound on the weight mass beyond the truncation depth.
inline double beyond_truncation_bound(int depth) {
  return std::pow(static_cast<double>(depth) + 1.0,
                  -static_cast<double>(depth)) /
         static_cast<double>(depth);
}

/// Sure upper bound on any observation: sum of the per-weight upper bounds.
inline double sure_upper_support(int depth) {
  double s = 0.0;
  for (int m = depth; m >= 1; --m) s += weight_upper_bound(m);
  return s;
}

// Draws V_1..V_M. The sure bounds are open intervals; float rounding of
// pow() can land a draw exactly on a bound, so those draws are rejected to
// keep downstream strict comparisons sure rather than almost-sure.
inline WeightSequence sample_weights(int depth, Rng& rng) {
  WeightSequence w;
  w.depth = depth;
  w.values.reserve(static_cast<std::size_t>(depth));
  for (int m = 1; m <= depth; ++m) {
    const double u_lo = 1.0 / (static_cast<double>(m) + 1.0);
    const double u_hi = 1.0 / static_cast<double>(m);
    const double v_lo = weight_lower_bound(m);
    const double v_hi = weight_upper_bound(m);
    double v = 0.0;
    do {
      const double u = u_lo + rng.uniform01() * (u_hi - u_lo);
      v = std::pow(u, static_cast<double>(m));
    } while (!(v > v_lo && v < v_hi));
    w.values.push_back(v);
  }
  return w;
}

struct TailSum {
  double empirical;        // sum of stored weights past m
  double bound_inclusive;  // empirical plus the beyond-truncation bound
};

inline TailSum tail_sum(const WeightSequence& w, int m) {
  if (m < 0 || m > w.depth) throw error("tail start exceeds the weight depth");
  // The inclusive bound must dominate the true tail by construction, and at
  // deep truncations the analytic beyond-depth cushion is far below double
  // rounding. Compensated summation brings the empirical part within one
  // ulp, and the bound is then rounded up two ulps to keep it sure.
  double emp = 0.0, comp = 0.0;
  for (int j = w.depth; j > m; --j) {
    const double x = w.at(j);
    const double t = emp + x;
    comp += std::abs(emp) >= std::abs(x) ? (emp - t) + x : (x - t) + emp;
    emp = t;
  }
  emp += comp;
  const double inf = std::numeric_limits<double>::infinity();
  double bound = emp + beyond_truncation_bound(w.depth);
  bound = std::nextafter(std::nextafter(bound, inf), inf);
  return {emp, bound};
}

// CDF of V_m = U^m for U uniform on (1/(m+1), 1/m), clamped to [0, 1].
inline double weight_cdf(int m, double v) {
  if (v <= weight_lower_bound(m)) return 0.0;
  if (v >= weight_upper_bound(m)) return 1.0;
  const double dm = static_cast<double>(m);
  const double u = std::pow(v, 1.0 / dm);
  const double f = dm * (dm + 1.0) * (u - 1.0 / (dm + 1.0));
  return f < 0.0 ? 0.0 : (f > 1.0 ? 1.0 : f);
}

// Coin rows are packed into one mask per observation, bit m-1 = Y_{m,i}.
// Coins are drawn in m order so the stream layout is part of the contract.
inline std::vector<double> simulate(const WeightSequence& w, std::size_t n,
                                    Rng& rng,
                                    std::vector<std::uint64_t>& y_masks) {
  y_masks.clear();
  y_masks.reserve(n);
  std::vector<double> xs;
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t mask = 0;
    for (int m = 1; m <= w.depth; ++m)
      if (rng.coin()) mask |= std::uint64_t{1} << (m - 1);
    double x = 0.0;
    for (int m = w.depth; m >= 1; --m)
      if (mask & (std::uint64_t{1} << (m - 1))) x += w.at(m);
    y_masks.push_back(mask);
    xs.push_back(x);
  }
  return xs;
}

// Grid sized for the one-dimensional law: zero sits on an interior node with
// a small margin below, and the top margin absorbs the one-cell spill each
// convolution level can produce.
inline GridSpec fd_default_grid(int depth,
                                std::size_t points = kDefaultGridPoints) {
  const std::size_t margin = 4 + static_cast<std::size_t>(depth) + 8;
  if (points < margin + 16) throw error("invalid grid: unsupported point count");
  const double step = sure_upper_support(depth) /
                      static_cast<double>(points - 1 - margin);
  const double lo = -4.0 * step;
  return GridSpec(lo, lo + static_cast<double>(points - 1) * step, points);
}

struct FdDensity {
  GridDensity density;
  double atom_at_zero;
};

// Law of a single observation as (continuous density, atom at zero). The
// 2^M-term mixture is folded up by M successive node-mass convolutions:
// masses[k] *= 1/2, plus 1/2 times the mass shifted by V_m's cell
// probabilities. Node masses convert to trapezoid-consistent density values
// because both grid endpoints stay empty. The never-shifted component is the
// all-tails pattern; halving is exact in floating point, so its final mass is
// exactly 2^-M and peeling it off leaves the continuous part nonnegative.
inline FdDensity fd_density_small_n(const WeightSequence& w,
                                    const GridSpec& spec) {
  if (w.depth > 12) throw error("mixture too large");
  const double step = spec.step();
  const double k0_real = -spec.lo / step;
  const double k0_round = std::round(k0_real);
  if (std::abs(k0_real - k0_round) > 1e-9 || k0_round < 1.0)
    throw error("grid must place zero on an interior node");
  const auto k0 = static_cast<std::size_t>(k0_round);
  if (spec.hi < sure_upper_support(w.depth))
    throw error("grid does not cover the reachable support");

  std::vector<double> mass(spec.points, 0.0);
  mass[k0] = 1.0;
  std::size_t lo_idx = k0;
  std::size_t hi_idx = k0;
  for (int m = 1; m <= w.depth; ++m) {
    // cell k receives the V_m mass between (k - 1/2) and (k + 1/2) steps
    const double v_lo = weight_lower_bound(m);
    const double v_hi = weight_upper_bound(m);
    const auto k_first =
        static_cast<std::size_t>(std::max(0.0, std::floor(v_lo / step + 0.5)));
    const auto k_last =
        static_cast<std::size_t>(std::floor(v_hi / step + 0.5)) + 1;
    std::vector<std::pair<std::size_t, double>> shift;
    for (std::size_t k = k_first; k <= k_last; ++k) {
      const double q =
          weight_cdf(m, (static_cast<double>(k) + 0.5) * step) -
          weight_cdf(m, (static_cast<double>(k) - 0.5) * step);
      if (q > 0.0) shift.emplace_back(k, q);
    }
    std::vector<double> next(mass);
    for (double& v : next) v *= 0.5;
    std::size_t new_hi = hi_idx;
    for (const auto& [k, q] : shift) {
      if (hi_idx + k >= spec.points - 1)
        throw error("grid does not cover the reachable support");
      for (std::size_t i = lo_idx; i <= hi_idx; ++i)
        next[i + k] += 0.5 * q * mass[i];
      new_hi = std::max(new_hi, hi_idx + k);
    }
    mass.swap(next);
    hi_idx = new_hi;
  }

  const double atom = std::ldexp(1.0, -w.depth);
  mass[k0] -= atom;
  for (double& v : mass) v /= step;
  return {GridDensity(spec.lo, step, std::move(mass)), atom};
}

// Truncated directing measure as explicit atoms: one per coin pattern, mass
// 2^-M each, at the subset sums of the weights. Capped where enumeration
// stops being desk scale; the cover module handles deep truncations.
inline MixedMeasure directing_atoms(const WeightSequence& w) {
  if (w.depth > 20)
    throw error("directing enumeration too deep; use the cover module");
  std::vector<double> sums{0.0};
  for (int m = 1; m <= w.depth; ++m) {
    const std::size_t sz = sums.size();
    sums.reserve(sz * 2);
    for (std::size_t i = 0; i < sz; ++i) sums.push_back(sums[i] + w.at(m));
  }
  const double mass = std::ldexp(1.0, -w.depth);
  std::vector<Atom> atoms;
  atoms.reserve(sums.size());
  for (double s : sums) atoms.push_back({s, mass});
  return MixedMeasure::from_atoms(std::move(atoms));
}

}  // namespace cidlab::singular
