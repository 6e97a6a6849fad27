#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "cidlab/common.hpp"

namespace cidlab {

// Uniform grid request: `points` nodes spanning [lo, hi].
struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = kDefaultGridPoints;

  GridSpec() = default;
  GridSpec(double lo_, double hi_, std::size_t points_ = kDefaultGridPoints)
      : lo(lo_), hi(hi_), points(points_) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi))
      throw error("invalid grid: need finite lo < hi");
    if (points < 2 || points > (std::size_t{1} << 22))
      throw error("invalid grid: unsupported point count");
  }
  double step() const { return (hi - lo) / static_cast<double>(points - 1); }
};

// Piecewise-linear density sampled on a uniform grid. The value between nodes
// is the linear interpolant and zero outside [lo, hi]; all integrals below
// are the exact integrals of that interpolant, i.e. composite trapezoid with
// exact partial end cells. Instances are immutable after construction.
class GridDensity {
 public:
  GridDensity(double lo, double step, std::vector<double> values)
      : lo_(lo), step_(step), values_(std::move(values)) {
    if (!(std::isfinite(lo_) && std::isfinite(step_)) || !(step_ > 0.0))
      throw error("invalid grid: need finite lo and positive step");
    if (values_.size() < 2) throw error("invalid grid: need at least 2 nodes");
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0)
        throw error("invalid density: values must be finite and nonnegative");
    }
    prefix_.resize(values_.size());
    prefix_[0] = 0.0;
    for (std::size_t i = 1; i < values_.size(); ++i)
      prefix_[i] = prefix_[i - 1] + 0.5 * step_ * (values_[i - 1] + values_[i]);
  }

  static GridDensity from_function(const GridSpec& spec,
                                   const std::function<double(double)>& f) {
    std::vector<double> v(spec.points);
    const double step = spec.step();
    for (std::size_t i = 0; i < spec.points; ++i)
      v[i] = f(spec.lo + step * static_cast<double>(i));
    return GridDensity(spec.lo, step, std::move(v));
  }

  double lo() const { return lo_; }
  double hi() const { return lo_ + step_ * static_cast<double>(size() - 1); }
  double step() const { return step_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double node(std::size_t i) const {
    return lo_ + step_ * static_cast<double>(i);
  }

  double value_at(double x) const {
    if (x < lo_ || x > hi()) return 0.0;
    const auto [i, t] = locate(x);
    return values_[i] + t * (values_[i + 1] - values_[i]);
  }

  double integral() const { return prefix_.back(); }

  // Integral of the interpolant over [a, b] (clamped to the grid).
  double integral(double a, double b) const {
    a = std::max(a, lo_);
    b = std::min(b, hi());
    if (!(a < b)) return 0.0;
    return cumulative_to(b) - cumulative_to(a);
  }

  // Trapezoid cumulative from the left edge to x; O(1) via prefix sums.
  double cumulative_to(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi()) return prefix_.back();
    const auto [i, t] = locate(x);
    const double fx = values_[i] + t * (values_[i + 1] - values_[i]);
    return prefix_[i] + 0.5 * (values_[i] + fx) * (x - node(i));
  }

  // Trapezoid integral of f^p over [a, b] (clamped). Endpoint values of the
  // partial cells interpolate f first, then raise to p.
  double power_integral(double a, double b, double p) const {
    a = std::max(a, lo_);
    b = std::min(b, hi());
    if (!(a < b)) return 0.0;
    const auto pw = [p](double v) { return std::pow(v, p); };
    const auto [ia, ta] = locate(a);
    const auto [ib, tb] = locate(b);
    const double fa = values_[ia] + ta * (values_[ia + 1] - values_[ia]);
    const double fb = values_[ib] + tb * (values_[ib + 1] - values_[ib]);
    if (ia == ib) return 0.5 * (pw(fa) + pw(fb)) * (b - a);
    double acc = 0.5 * (pw(fa) + pw(values_[ia + 1])) * (node(ia + 1) - a);
    for (std::size_t i = ia + 1; i < ib; ++i)
      acc += 0.5 * step_ * (pw(values_[i]) + pw(values_[i + 1]));
    acc += 0.5 * (pw(values_[ib]) + pw(fb)) * (b - node(ib));
    return acc;
  }

  // Resamples the interpolant onto a new grid; values outside this grid read
  // as zero. Used to bring two densities onto a common grid.
  GridDensity resampled(const GridSpec& spec) const {
    std::vector<double> v(spec.points);
    const double step = spec.step();
    for (std::size_t i = 0; i < spec.points; ++i)
      v[i] = value_at(spec.lo + step * static_cast<double>(i));
    return GridDensity(spec.lo, step, std::move(v));
  }

  bool same_grid(const GridDensity& other) const {
    return size() == other.size() && lo_ == other.lo_ && step_ == other.step_;
  }

 private:
  // Cell index and fractional offset of x; x must lie within the grid.
  std::pair<std::size_t, double> locate(double x) const {
    double u = (x - lo_) / step_;
    auto i = static_cast<std::size_t>(u);
    if (i >= size() - 1) i = size() - 2;
    return {i, u - static_cast<double>(i)};
  }

  double lo_;
  double step_;
  std::vector<double> values_;
  std::vector<double> prefix_;
};

}  // namespace cidlab
