#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cidlab/common.hpp"
#include "cidlab/grid_density.hpp"

namespace cidlab {

// Measures live either on the real line (atoms plus a grid density) or on an
// unordered finite label set {0..k-1} (atoms only; labels stored as doubles).
// CDF-based operations are undefined on the latter.
enum class DomainKind { real_line, finite_set };

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

// A finite measure on the line: sum of point masses and an absolutely
// continuous part. Total mass may be below one (decompositions return
// sub-probability parts); operations that need a probability measure check it
// themselves. Immutable after construction.
class MixedMeasure {
 public:
  MixedMeasure(DomainKind domain, std::vector<Atom> atoms,
               std::optional<GridDensity> density)
      : domain_(domain),
        atoms_(normalize_atoms(std::move(atoms))),
        density_(std::move(density)) {
    if (domain_ == DomainKind::finite_set && density_.has_value())
      throw error("finite-set measures cannot carry a density");
    atom_prefix_.resize(atoms_.size() + 1);
    atom_prefix_[0] = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      atom_prefix_[i + 1] = atom_prefix_[i] + atoms_[i].mass;
    const double total = total_mass();
    if (total > 1.0 + kMassTol)
      throw error("invalid measure: total mass exceeds 1");
  }

  static MixedMeasure dirac(double x) {
    return MixedMeasure(DomainKind::real_line, {{x, 1.0}}, std::nullopt);
  }

  static MixedMeasure from_atoms(std::vector<Atom> atoms,
                                 DomainKind domain = DomainKind::real_line) {
    return MixedMeasure(domain, std::move(atoms), std::nullopt);
  }

  // Purely atomic measure on labels 0..k-1.
  static MixedMeasure on_labels(std::span<const double> masses) {
    std::vector<Atom> atoms;
    atoms.reserve(masses.size());
    for (std::size_t j = 0; j < masses.size(); ++j) {
      if (masses[j] > 0.0) atoms.push_back({static_cast<double>(j), masses[j]});
    }
    return MixedMeasure(DomainKind::finite_set, std::move(atoms), std::nullopt);
  }

  static MixedMeasure from_density(GridDensity density) {
    return MixedMeasure(DomainKind::real_line, {}, std::move(density));
  }

  // Normal density sampled pointwise on [mean - 8 sd, mean + 8 sd]. Not
  // renormalized: endpoint derivatives vanish at 8 sd, so the trapezoid mass
  // is already 1 to ~1e-13, and pointwise values stay comparable across the
  // different evaluation routes that the tests cross-check.
  static MixedMeasure gaussian(double mean, double sd,
                               std::size_t points = kDefaultGridPoints) {
    if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean))
      throw error("invalid gaussian parameters");
    const GridSpec spec(mean - kGaussianGridHalfWidthSds * sd,
                        mean + kGaussianGridHalfWidthSds * sd, points);
    return from_density(GridDensity::from_function(
        spec, [&](double x) { return normal_pdf(x, mean, sd); }));
  }

  static MixedMeasure uniform(double a, double b,
                              std::size_t points = kDefaultGridPoints) {
    const GridSpec spec(a, b, points);
    return from_density(
        GridDensity::from_function(spec, [&](double) { return 1.0 / (b - a); }));
  }

  // Empirical measure of a sample: mass 1/n per point, duplicates merged.
  static MixedMeasure empirical(std::span<const double> xs) {
    if (xs.empty()) throw error("empirical measure needs at least one point");
    std::vector<Atom> atoms;
    atoms.reserve(xs.size());
    const double w = 1.0 / static_cast<double>(xs.size());
    for (double x : xs) atoms.push_back({x, w});
    return from_atoms(std::move(atoms));
  }

  static MixedMeasure zero(DomainKind domain = DomainKind::real_line) {
    return MixedMeasure(domain, {}, std::nullopt);
  }

  DomainKind domain() const { return domain_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<GridDensity>& density() const { return density_; }

  double atom_mass() const { return atom_prefix_.back(); }
  double continuous_mass() const {
    return density_ ? density_->integral() : 0.0;
  }
  double total_mass() const { return atom_mass() + continuous_mass(); }
  bool is_probability() const {
    return std::abs(total_mass() - 1.0) <= kMassTol;
  }

  // Mass of the single point {x}; locations within kAtomMergeTol match.
  double mass_at(double x) const {
    auto it = std::lower_bound(
        atoms_.begin(), atoms_.end(), x - kAtomMergeTol,
        [](const Atom& a, double v) { return a.location < v; });
    double s = 0.0;
    for (; it != atoms_.end() && it->location <= x + kAtomMergeTol; ++it)
      s += it->mass;
    return s;
  }

  double cdf(double x) const {
    require_ordered();
    const double s = density_ ? density_->cumulative_to(x) : 0.0;
    auto it = std::upper_bound(
        atoms_.begin(), atoms_.end(), x,
        [](double v, const Atom& a) { return v < a.location; });
    return s + atom_prefix_[static_cast<std::size_t>(it - atoms_.begin())];
  }

  // Left limit F(x-): excludes any atom sitting exactly at x.
  double cdf_left(double x) const {
    require_ordered();
    const double s = density_ ? density_->cumulative_to(x) : 0.0;
    auto it = std::lower_bound(
        atoms_.begin(), atoms_.end(), x,
        [](const Atom& a, double v) { return a.location < v; });
    return s + atom_prefix_[static_cast<std::size_t>(it - atoms_.begin())];
  }

  // Mass of the interval (a, b].
  double interval_mass(double a, double b) const {
    if (!(a < b)) return 0.0;
    return cdf(b) - cdf(a);
  }

 private:
  void require_ordered() const {
    if (domain_ == DomainKind::finite_set)
      throw error("undefined for unordered finite domain");
  }

  static std::vector<Atom> normalize_atoms(std::vector<Atom> atoms) {
    for (const Atom& a : atoms) {
      if (!std::isfinite(a.location) || !std::isfinite(a.mass) || a.mass <= 0.0)
        throw error("invalid atom: need finite location and positive mass");
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& x, const Atom& y) { return x.location < y.location; });
    std::vector<Atom> merged;
    merged.reserve(atoms.size());
    for (const Atom& a : atoms) {
      if (!merged.empty() && a.location - merged.back().location <= kAtomMergeTol)
        merged.back().mass += a.mass;
      else
        merged.push_back(a);
    }
    return merged;
  }

  DomainKind domain_;
  std::vector<Atom> atoms_;
  std::optional<GridDensity> density_;
  std::vector<double> atom_prefix_;  // atom_prefix_[i] = mass of first i atoms
};

}  // namespace cidlab
