#pragma once

// Box-cover analysis of the singular model's directing measure. Truncating
// the weight expansion at level m' localizes the support into at most 2^{m'}
// intervals whose radius is the tail mass past m'. Counting the merged
// intervals and measuring the widest one gives an upper bound on the box
// dimension, which dominates the Hausdorff dimension.
//
// Center coordinates are kept in compensated double-double form. At m' = 20
// the interval widths are near 1e-16 while the centers are order one, so
// plain double rounding of the centers would swamp the entire geometry
// being measured.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <vector>

#include "cidlab/common.hpp"
#include "cidlab/models/singular.hpp"
#include "cidlab/rng.hpp"
#include "cidlab/series.hpp"

namespace cidlab {

namespace dd {

// Unevaluated sum hi + lo with |lo| no more than half an ulp of hi.
struct Real {
  double hi = 0.0;
  double lo = 0.0;
};

inline Real two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

// Requires |a| >= |b| or a == 0.
inline Real quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline Real add(Real a, double b) {
  const Real s = two_sum(a.hi, b);
  return quick_two_sum(s.hi, s.lo + a.lo);
}

inline Real add(Real a, Real b) {
  Real s = two_sum(a.hi, b.hi);
  const Real t = two_sum(a.lo, b.lo);
  s = quick_two_sum(s.hi, s.lo + t.hi);
  return quick_two_sum(s.hi, s.lo + t.lo);
}

inline Real sub(Real a, Real b) { return add(a, Real{-b.hi, -b.lo}); }

inline double value(Real a) { return a.hi + a.lo; }

inline bool less(Real a, Real b) {
  return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}

}  // namespace dd

// Touching or overlapping intervals are treated as one; the tolerance keeps
// counts stable against representation noise without bridging any true gap,
// which at the deepest certified level is still above 1e-15.
inline constexpr double kCoverMergeTolerance = 1e-15;

// Containment slack for the mass check: far above the double-double
// rounding error (~1e-32 at these magnitudes) and far below any true gap.
inline constexpr double kCoverContainmentSlack = 1e-29;

inline constexpr int kMaxCoverTruncation = 25;

inline double box_dimension(std::size_t count, double eps) {
  if (count <= 1 || !(eps > 0.0) || eps >= 1.0) return 0.0;
  return std::log(static_cast<double>(count)) / std::log(1.0 / eps);
}

struct CoverEstimate {
  int depth = 0;
  std::size_t interval_count = 0;
  double max_interval_length = 0.0;
  double dim_estimate = 0.0;

  // Scaling every weight by `factor` scales every interval the same way and
  // leaves the count alone; this recomputes the estimate from the stored
  // count and length without touching any geometry.
  CoverEstimate rescaled(double factor) const {
    CoverEstimate out = *this;
    out.max_interval_length = factor * max_interval_length;
    out.dim_estimate = box_dimension(interval_count, out.max_interval_length);
    return out;
  }
};

struct Cover {
  std::vector<dd::Real> lower;
  std::vector<dd::Real> upper;
  double radius = 0.0;
  CoverEstimate estimate;
};

inline Cover build_cover(const singular::WeightSequence& v, int m_prime) {
  if (m_prime < 0 || m_prime > v.depth || m_prime > kMaxCoverTruncation)
    throw error("cover truncation depth out of range");

  // All subset sums of V_1..V_{m'}, ascending. Each level merges the
  // previous level with a shifted copy; merging two sorted runs keeps the
  // whole list sorted with no assumptions on the gap structure.
  std::vector<dd::Real> centers{dd::Real{}};
  for (int m = 1; m <= m_prime; ++m) {
    const double vm = v.at(m);
    std::vector<dd::Real> shifted(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i)
      shifted[i] = dd::add(centers[i], vm);
    std::vector<dd::Real> merged;
    merged.reserve(2 * centers.size());
    std::merge(centers.begin(), centers.end(), shifted.begin(), shifted.end(),
               std::back_inserter(merged),
               [](const dd::Real& a, const dd::Real& b) { return dd::less(a, b); });
    centers = std::move(merged);
  }
  for (std::size_t i = 1; i < centers.size(); ++i)
    if (dd::less(centers[i], centers[i - 1]))
      throw error("cover centers out of order");

  Cover cover;
  cover.radius = singular::tail_sum(v, m_prime).bound_inclusive;

  dd::Real lo = dd::add(centers[0], -cover.radius);
  dd::Real hi = dd::add(centers[0], cover.radius);
  double eps = 0.0;
  auto close_interval = [&] {
    cover.lower.push_back(lo);
    cover.upper.push_back(hi);
    eps = std::max(eps, dd::value(dd::sub(hi, lo)));
  };
  for (std::size_t k = 1; k < centers.size(); ++k) {
    const dd::Real next_lo = dd::add(centers[k], -cover.radius);
    if (dd::value(dd::sub(next_lo, hi)) <= kCoverMergeTolerance) {
      hi = dd::add(centers[k], cover.radius);
      continue;
    }
    close_interval();
    lo = next_lo;
    hi = dd::add(centers[k], cover.radius);
  }
  close_interval();

  cover.estimate = {m_prime, cover.lower.size(), eps,
                    box_dimension(cover.lower.size(), eps)};
  return cover;
}

inline CoverEstimate cover_at_depth(const singular::WeightSequence& v,
                                    int m_prime) {
  return build_cover(v, m_prime).estimate;
}

// Fraction of directing-measure draws (truncated at the weight depth) that
// land inside the cover. Containment is a sure geometric fact, so anything
// below 1 is a bug, not noise. Zero samples is vacuously 1 by convention.
inline double cover_mass_check(const singular::WeightSequence& v, int m_prime,
                               std::size_t samples, Rng& rng) {
  const Cover cover = build_cover(v, m_prime);
  if (samples == 0) return 1.0;

  const std::uint64_t mask_all = (std::uint64_t{1} << v.depth) - 1;
  std::size_t inside = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::uint64_t bits = rng.next_u64() & mask_all;
    dd::Real x{};
    for (int m = v.depth; m >= 1; --m)
      if (bits & (std::uint64_t{1} << (m - 1))) x = dd::add(x, v.at(m));

    auto contains = [&](std::size_t i) {
      return dd::value(dd::sub(x, cover.lower[i])) >= -kCoverContainmentSlack &&
             dd::value(dd::sub(cover.upper[i], x)) >= -kCoverContainmentSlack;
    };
    const auto it = std::upper_bound(
        cover.lower.begin(), cover.lower.end(), x,
        [](const dd::Real& xx, const dd::Real& lo) { return dd::less(xx, lo); });
    const auto idx = static_cast<std::size_t>(it - cover.lower.begin());
    if ((idx > 0 && contains(idx - 1)) ||
        (idx < cover.lower.size() && contains(idx)))
      ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(samples);
}

// The divergence certificate for the weight construction: the ratio of each
// weight to the whole tail after it must exceed the level index, surely,
// which forces the ratio to infinity.
inline DiagnosticsSeries ratio_curve(const singular::WeightSequence& v) {
  if (v.depth < 3) throw error("ratio curve needs depth at least 3");
  DiagnosticsSeries s;
  s.label = "ratio_curve";
  s.threshold_used = 1.0;
  bool all_above = true;
  for (int m = 1; m < v.depth; ++m) {
    const double r = v.at(m) / singular::tail_sum(v, m).bound_inclusive;
    s.points.push_back({static_cast<double>(m), r, 0.0});
    if (!(r > static_cast<double>(m))) all_above = false;
  }
  s.verdict = all_above ? Verdict::pass : Verdict::fail;
  s.notes = "ratio of each weight to its tail must exceed the level index";
  return s;
}

}  // namespace cidlab
