#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "cidlab/common.hpp"
#include "cidlab/grid_density.hpp"
#include "cidlab/mixed_measure.hpp"

namespace cidlab {

namespace detail {

inline void require_same_domain(const MixedMeasure& mu, const MixedMeasure& nu) {
  if (mu.domain() != nu.domain()) throw error("incompatible domains");
}

inline void require_probability(const MixedMeasure& m) {
  if (!m.is_probability()) throw error("mass deficit");
}

// L1 distance between the atomic parts. Both atom lists are sorted; locations
// within kAtomMergeTol are identified. Accumulates in ascending location
// order, which the purely-atomic identity tests rely on.
inline double atom_l1(const MixedMeasure& mu, const MixedMeasure& nu) {
  const auto& a = mu.atoms();
  const auto& b = nu.atoms();
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() &&
                          a[i].location < b[j].location - kAtomMergeTol)) {
      acc += a[i++].mass;
    } else if (i == a.size() || b[j].location < a[i].location - kAtomMergeTol) {
      acc += b[j++].mass;
    } else {
      acc += std::abs(a[i].mass - b[j].mass);
      ++i;
      ++j;
    }
  }
  return acc;
}

// Common refinement used when two densities live on different grids: the
// union span with the finer step, both resampled by linear interpolation.
inline std::pair<GridDensity, GridDensity> common_grid(const GridDensity& f,
                                                       const GridDensity& g) {
  const double lo = std::min(f.lo(), g.lo());
  const double hi = std::max(f.hi(), g.hi());
  const double step = std::min(f.step(), g.step());
  auto points = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  points = std::clamp<std::size_t>(points, 2, std::size_t{1} << 22);
  const GridSpec spec(lo, hi, points);
  return {f.resampled(spec), g.resampled(spec)};
}

inline double density_l1(const GridDensity& f, const GridDensity& g) {
  auto diff_integral = [](const GridDensity& x, const GridDensity& y) {
    const auto& xv = x.values();
    const auto& yv = y.values();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < xv.size(); ++i) {
      acc += 0.5 * x.step() *
             (std::abs(xv[i] - yv[i]) + std::abs(xv[i + 1] - yv[i + 1]));
    }
    return acc;
  };
  if (f.same_grid(g)) return diff_integral(f, g);
  auto [fr, gr] = common_grid(f, g);
  return diff_integral(fr, gr);
}

}  // namespace detail

// Total variation distance between two probability measures: half the atom
// mass gap plus half the L1 gap of the densities.
inline double tv_distance(const MixedMeasure& mu, const MixedMeasure& nu) {
  detail::require_same_domain(mu, nu);
  detail::require_probability(mu);
  detail::require_probability(nu);

  double acc = detail::atom_l1(mu, nu);
  const auto& f = mu.density();
  const auto& g = nu.density();
  if (f && g) {
    acc += detail::density_l1(*f, *g);
  } else if (f) {
    acc += f->integral();
  } else if (g) {
    acc += g->integral();
  }
  return std::clamp(0.5 * acc, 0.0, 1.0);
}

// Kolmogorov distance sup_x |F_mu(x) - F_nu(x)|, with the sup taken over both
// x and the left limits x-. Candidate points are all atoms, all grid nodes
// and all cell midpoints of either measure; between candidates the CDFs are
// quadratic so the residual error is O(step^2).
inline double kolmogorov_distance(const MixedMeasure& mu,
                                  const MixedMeasure& nu) {
  detail::require_same_domain(mu, nu);
  if (mu.domain() == DomainKind::finite_set)
    throw error("undefined for unordered finite domain");
  detail::require_probability(mu);
  detail::require_probability(nu);

  std::vector<double> xs;
  auto add_candidates = [&xs](const MixedMeasure& m) {
    for (const Atom& a : m.atoms()) xs.push_back(a.location);
    if (m.density()) {
      const GridDensity& d = *m.density();
      for (std::size_t i = 0; i < d.size(); ++i) {
        xs.push_back(d.node(i));
        if (i + 1 < d.size()) xs.push_back(d.node(i) + 0.5 * d.step());
      }
    }
  };
  add_candidates(mu);
  add_candidates(nu);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  double sup = 0.0;
  for (double x : xs) {
    sup = std::max(sup, std::abs(mu.cdf(x) - nu.cdf(x)));
    sup = std::max(sup, std::abs(mu.cdf_left(x) - nu.cdf_left(x)));
  }
  return std::min(sup, 1.0);
}

// Splits a measure into its absolutely continuous and purely atomic parts.
// Both are sub-probability measures on the same domain; either may be zero.
inline std::pair<MixedMeasure, MixedMeasure> decompose(const MixedMeasure& nu) {
  MixedMeasure cont(nu.domain(), {}, nu.density());
  MixedMeasure disc(nu.domain(), nu.atoms(), std::nullopt);
  return {std::move(cont), std::move(disc)};
}

// Integral of the density raised to p over the window K. Atoms are ignored:
// this quantifies only the absolutely continuous part. The grid must cover K;
// the density is zero off its grid, so a clipped window would silently report
// a smaller integral than requested.
inline double lp_density_norm(const MixedMeasure& mu, const CompactWindow& k,
                              double p) {
  if (!(p >= 1.0)) throw error("invalid p: need p >= 1");
  if (!mu.density()) throw error("no density");
  const GridDensity& d = *mu.density();
  const double slack = d.step() * 1e-9;
  if (k.lo < d.lo() - slack || k.hi > d.hi() + slack)
    throw error("window outside grid");
  return d.power_integral(k.lo, k.hi, p);
}

}  // namespace cidlab
