#pragma once

// Checks that turn the limit claims into finite-n series with explicit
// verdicts: total-variation and atom-gap convergence of predictives to the
// directing measure, predictive-vs-empirical agreement, L^p boundedness of
// predictive densities, the one-step martingale identity, the maximal
// inequality, and the identity-pattern search in the coin array.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "cidlab/calibration.hpp"
#include "cidlab/metrics.hpp"
#include "cidlab/models.hpp"
#include "cidlab/series.hpp"

namespace cidlab {

inline std::vector<std::size_t> default_checkpoints(std::size_t cap) {
  std::vector<std::size_t> out;
  for (std::size_t v : calib::kDefaultCheckpoints)
    if (v <= cap) out.push_back(v);
  return out;
}

namespace detail {

inline void require_checkpoints(std::span<const std::size_t> checkpoints,
                                std::size_t length) {
  if (checkpoints.empty() || checkpoints.front() == 0)
    throw error("checkpoints must be positive and increasing");
  for (std::size_t i = 1; i < checkpoints.size(); ++i)
    if (checkpoints[i] <= checkpoints[i - 1])
      throw error("checkpoints must be positive and increasing");
  if (checkpoints.back() > length)
    throw error("checkpoint beyond trajectory length");
}

inline std::span<const double> prefix(const Trajectory& traj, std::size_t n) {
  return std::span(traj.observations).first(n);
}

}  // namespace detail

// Total variation between the predictive at each checkpoint and the
// directing measure. Pass requires a downward trend and a small final value;
// a mutually singular pair pins the whole curve at 1 and fails.
inline DiagnosticsSeries tv_curve(const Trajectory& traj,
                                  std::span<const std::size_t> checkpoints,
                                  double final_threshold = calib::kTvFinal) {
  detail::require_checkpoints(checkpoints, traj.observations.size());
  const DirectingMeasure dir = directing(traj.spec, traj);

  DiagnosticsSeries s;
  s.label = "tv_curve";
  s.threshold_used = final_threshold;
  for (std::size_t n : checkpoints) {
    const auto alpha_n = predictive(traj.spec, detail::prefix(traj, n));
    s.points.push_back({static_cast<double>(n),
                        tv_distance(alpha_n, dir.measure), 0.0});
  }
  const double rho = spearman(s.points);
  s.verdict = (rho < 0.0 && s.final_value() <= final_threshold)
                  ? Verdict::pass
                  : Verdict::fail;
  char buf[128];
  std::snprintf(buf, sizeof buf, "spearman=%.6f final=%.6g", rho,
                s.final_value());
  s.notes = buf;
  if (dir.is_proxy) s.notes += "; directing measure is a long-run proxy";
  return s;
}

// Largest gap in point masses between the predictive at n and the directing
// measure, over every atom location of either. No atoms anywhere means both
// assign zero to every point, reported as 0 with a note.
inline double atom_sup_gap(const Trajectory& traj, std::size_t n,
                           std::string* note = nullptr) {
  if (n > traj.observations.size())
    throw error("checkpoint beyond trajectory length");
  const DirectingMeasure dir = directing(traj.spec, traj);
  const auto alpha_n = predictive(traj.spec, detail::prefix(traj, n));

  std::vector<double> locations;
  for (const Atom& a : alpha_n.atoms()) locations.push_back(a.location);
  for (const Atom& a : dir.measure.atoms()) locations.push_back(a.location);
  if (locations.empty()) {
    if (note) *note = "no atoms on either side";
    return 0.0;
  }
  std::sort(locations.begin(), locations.end());
  double sup = 0.0;
  double last = locations.front() - 1.0;
  for (double x : locations) {
    if (x - last <= kAtomMergeTol) continue;
    last = x;
    sup = std::max(sup, std::abs(alpha_n.mass_at(x) - dir.measure.mass_at(x)));
  }
  return sup;
}

// Kolmogorov distance between the predictive at n and the empirical measure
// of the first n observations.
inline double empirical_gap(const Trajectory& traj, std::size_t n) {
  if (n == 0) throw error("empirical gap needs at least one observation");
  if (n > traj.observations.size())
    throw error("checkpoint beyond trajectory length");
  const auto alpha_n = predictive(traj.spec, detail::prefix(traj, n));

  std::vector<Atom> atoms;
  atoms.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    atoms.push_back({traj.observations[i], w});
  const auto mu_n = MixedMeasure::from_atoms(std::move(atoms), alpha_n.domain());
  return kolmogorov_distance(alpha_n, mu_n);
}

// Integral of the predictive density to the p-th power over the window, per
// checkpoint. The density is evaluated on a grid that hulls both the window
// and the predictive's own support, stepped finely enough to resolve the
// density; a predictive too narrow for the point budget is an error rather
// than a silently coarse answer.
inline DiagnosticsSeries lp_curve(const Trajectory& traj,
                                  const CompactWindow& k, double p,
                                  std::span<const std::size_t> checkpoints) {
  detail::require_checkpoints(checkpoints, traj.observations.size());
  const ModelSpec& spec = traj.spec;

  DiagnosticsSeries s;
  s.label = "lp_curve";
  s.threshold_used = 1.0 + calib::kLpStabilizationGrowth;

  const bool gaussian_predictive =
      spec.tag == ModelTag::gauss_conj || spec.tag == ModelTag::gauss_cid;
  for (std::size_t n : checkpoints) {
    const auto hist = detail::prefix(traj, n);
    double value = 0.0;
    if (gaussian_predictive) {
      const auto [mean, sd] = predictive_gaussian(spec, hist);
      const double lo = std::min(k.lo, mean - 8.0 * sd);
      const double hi = std::max(k.hi, mean + 8.0 * sd);
      const double step = sd / 8.0;
      const double raw_points = (hi - lo) / step + 2.0;
      if (!(raw_points < static_cast<double>(std::size_t{1} << 20)))
        throw error("window unresolvable");
      const GridSpec grid(lo, hi, static_cast<std::size_t>(raw_points));
      auto mu = MixedMeasure::from_density(GridDensity::from_function(
          grid, [&](double x) { return normal_pdf(x, mean, sd); }));
      value = lp_density_norm(mu, k, p);
    } else {
      value = lp_density_norm(predictive(spec, hist), k, p);
    }
    s.points.push_back({static_cast<double>(n), value, 0.0});
  }

  // Bounded means the running max has stabilized: over the last half of the
  // checkpoints it may grow by at most the calibrated fraction.
  std::vector<double> running(s.points.size());
  double rm = 0.0;
  for (std::size_t i = 0; i < s.points.size(); ++i)
    running[i] = rm = std::max(rm, s.points[i].value);
  const std::size_t mid = (s.points.size() - 1) / 2;
  const bool bounded =
      running.back() <= running[mid] * (1.0 + calib::kLpStabilizationGrowth);
  s.verdict = bounded ? Verdict::pass : Verdict::fail;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "running max %.6g at midpoint vs %.6g at end", running[mid],
                running.back());
  s.notes = buf;
  return s;
}

// Target event for the martingale identity: a half line (-inf, upper], or
// the whole line where both sides are 1 and the residual vanishes exactly.
struct MartingaleTarget {
  bool whole_line = false;
  double upper = 0.0;
  std::string label;
};

inline MartingaleTarget target_upto(double upper) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "(-inf,%g]", upper);
  return {false, upper, buf};
}

inline MartingaleTarget target_all() { return {true, 0.0, "all"}; }

// One-step martingale identity: averaging the next predictive's mass of B
// over the current predictive must reproduce the current mass of B. Exact by
// enumeration for the urn model; Monte Carlo for the Gaussian models.
inline DiagnosticsSeries martingale_residual(
    const ModelSpec& spec, const std::vector<double>& history,
    std::span<const MartingaleTarget> targets, std::size_t trials, Rng& rng) {
  if (targets.empty()) throw error("martingale check needs a target");
  validate(spec);

  DiagnosticsSeries s;
  s.label = "martingale_residual";

  if (spec.tag == ModelTag::polya) {
    const auto& weights = spec.polya.weights;
    auto counts = polya::counts_from_history(weights.size(), history);
    const auto masses = polya::predictive_masses(weights, counts);
    auto event_mass = [&](std::span<const double> m,
                          const MartingaleTarget& t) {
      if (t.whole_line) return 1.0;
      double acc = 0.0;
      for (std::size_t j = 0; j < m.size(); ++j)
        if (static_cast<double>(j) <= t.upper) acc += m[j];
      return acc;
    };
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      const auto& t = targets[ti];
      double mixed = 0.0;
      for (std::size_t j = 0; j < weights.size(); ++j) {
        auto next_counts = counts;
        ++next_counts[j];
        const auto next = polya::predictive_masses(weights, next_counts);
        mixed += masses[j] * event_mass(next, t);
      }
      const double residual = mixed - event_mass(masses, t);
      s.points.push_back({static_cast<double>(ti), residual, 0.0});
    }
    s.threshold_used = calib::kExactTol;
    bool ok = true;
    for (const auto& pt : s.points) ok &= std::abs(pt.value) <= calib::kExactTol;
    s.verdict = ok ? Verdict::pass : Verdict::fail;
    s.notes = "exact enumeration";
    return s;
  }

  if (spec.tag != ModelTag::gauss_conj && spec.tag != ModelTag::gauss_cid)
    throw error("predictive is not Gaussian for this model");
  if (trials == 0) throw error("martingale check needs trials");

  const auto [mean_n, sd_n] = predictive_gaussian(spec, history);

  // Conditioning state is shared across draws: the conjugate update only
  // needs the extended history, and the dependent model exposes a one-step
  // lookahead on a conditioner built once.
  gauss_cid::CidConditioner cond(spec.cid, history.size() + 1);
  if (spec.tag == ModelTag::gauss_cid)
    for (double h : history) cond.push(h);
  auto extended = history;
  extended.push_back(0.0);

  std::vector<RunningStat> stats(targets.size());
  for (std::size_t t = 0; t < trials; ++t) {
    const double x = rng.normal(mean_n, sd_n);
    std::pair<double, double> next;
    if (spec.tag == ModelTag::gauss_cid) {
      next = cond.lookahead(x);
    } else {
      extended.back() = x;
      next = predictive_gaussian(spec, extended);
    }
    const auto [m1, s1] = next;
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      const auto& tg = targets[ti];
      stats[ti].add(tg.whole_line ? 1.0 : normal_cdf(tg.upper, m1, s1));
    }
  }
  s.threshold_used = calib::kMcSigmas;
  bool ok = true;
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    const auto& tg = targets[ti];
    const double base =
        tg.whole_line ? 1.0 : normal_cdf(tg.upper, mean_n, sd_n);
    const double residual = stats[ti].mean() - base;
    const double se = stats[ti].stderror();
    s.points.push_back({static_cast<double>(ti), residual, se});
    // The absolute floor absorbs residuals on events whose probability is
    // numerically zero, where the error bars are pure rounding noise.
    ok &= std::abs(residual) <= calib::kMcSigmas * se + calib::kExactTol;
  }
  s.verdict = ok ? Verdict::pass : Verdict::fail;
  char buf[64];
  std::snprintf(buf, sizeof buf, "monte carlo, trials=%zu", trials);
  s.notes = buf;
  return s;
}

// Closed form for the integral over [a, b] of a normal density to the p-th
// power; the analytic leg of the maximal-inequality check, independent of
// the grid quadrature used by lp_curve.
inline double gaussian_window_power_integral(double mean, double sd,
                                             const CompactWindow& k,
                                             double p) {
  const double root_p = std::sqrt(p);
  const double scale = std::pow(2.0 * kPi, 0.5 * (1.0 - p)) *
                       std::pow(sd, 1.0 - p) / root_p;
  return scale * (normal_cdf(root_p * (k.hi - mean) / sd) -
                  normal_cdf(root_p * (k.lo - mean) / sd));
}

struct DoobReport {
  double constant = 0.0;  // (p/(p-1))^p
  double lhs = 0.0;       // E max_n of the window integral
  double lhs_se = 0.0;
  double rhs = 0.0;  // constant times sup_n of the mean window integral
  double rhs_se = 0.0;
  std::size_t worst_n = 0;
  Verdict verdict = Verdict::inconclusive;
  std::string notes;
};

// Maximal inequality for the predictive-density window integrals: the mean
// of the per-path running max must not exceed (p/(p-1))^p times the largest
// per-n mean, within Monte Carlo error. The bound is deterministic for any
// nonnegative submartingale, so a failure means a bug, not bad luck.
inline DoobReport doob_check(const ModelSpec& spec, const CompactWindow& k,
                             double p, std::size_t n_max, std::size_t trials) {
  validate(spec);
  if (!(p > 1.0)) throw error("invalid p: need p > 1");
  if (trials < 2) throw error("doob check needs at least two trials");
  if (spec.tag != ModelTag::gauss_conj && spec.tag != ModelTag::gauss_cid)
    throw error("predictive is not Gaussian for this model");

  DoobReport rep;
  rep.constant = std::pow(p / (p - 1.0), p);

  RunningStat max_stat;
  std::vector<RunningStat> per_n(n_max + 1);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng = purpose_rng(spec.seed, trial, StreamPurpose::doob_mc);
    std::vector<double> xs;
    if (spec.tag == ModelTag::gauss_conj) {
      double theta = 0.0;
      xs = gauss_conj::simulate(spec.conj, n_max, rng, theta);
    } else {
      std::vector<double> w_partial;
      xs = gauss_cid::simulate(spec.cid, n_max, rng, w_partial);
    }

    double path_max = 0.0;
    if (spec.tag == ModelTag::gauss_conj) {
      for (std::size_t n = 0; n <= n_max; ++n) {
        const auto post = gauss_conj::posterior(
            spec.conj, std::span(xs).first(n));
        const double i_n = gaussian_window_power_integral(
            post.mean, std::sqrt(spec.conj.sigma_sq + post.var), k, p);
        per_n[n].add(i_n);
        path_max = std::max(path_max, i_n);
      }
    } else {
      gauss_cid::CidConditioner cond(spec.cid, n_max);
      for (std::size_t n = 0; n <= n_max; ++n) {
        const auto [m, s] = cond.predictive();
        const double i_n = gaussian_window_power_integral(m, s, k, p);
        per_n[n].add(i_n);
        path_max = std::max(path_max, i_n);
        if (n < n_max) cond.push(xs[n]);
      }
    }
    max_stat.add(path_max);
  }

  rep.lhs = max_stat.mean();
  rep.lhs_se = max_stat.stderror();
  double sup_mean = 0.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    if (per_n[n].mean() > sup_mean) {
      sup_mean = per_n[n].mean();
      rep.worst_n = n;
    }
  }
  // The standard error of the sup is approximated by the standard error at
  // the argmax; adjacent checkpoints are strongly correlated so this is the
  // dominant term.
  rep.rhs = rep.constant * sup_mean;
  rep.rhs_se = rep.constant * per_n[rep.worst_n].stderror();
  const double band =
      calib::kMcSigmas * std::hypot(rep.lhs_se, rep.rhs_se);
  rep.verdict = rep.lhs <= rep.rhs + band ? Verdict::pass : Verdict::fail;
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "lhs=%.6g (se %.2g) rhs=%.6g (se %.2g) at n=%zu, constant=%g",
                rep.lhs, rep.lhs_se, rep.rhs, rep.rhs_se, rep.worst_n,
                rep.constant);
  rep.notes = buf;
  return rep;
}

struct IdentitySearch {
  int pattern_size = 0;
  std::size_t trials = 0;
  std::size_t completed = 0;
  // Depth statistics count coin entries consumed: rows scanned times the
  // pattern size, since each row contributes one coin per column.
  double mean_entries = 0.0;
  double se_entries = 0.0;
  double median_entries = 0.0;
  double max_entries = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::string notes;
};

inline constexpr std::size_t kIdentitySearchRowCap = 1000000;

// Scans the coin array row by row for the first window of rows forming the
// identity pattern on the first `n` columns, the almost-sure event behind
// the construction. Every trial must terminate; hitting the row cap leaves
// the verdict inconclusive rather than failing an a.s. claim on a finite
// budget.
inline IdentitySearch identity_pattern_search(const ModelSpec& spec, int n,
                                              std::size_t trials) {
  validate(spec);
  if (spec.tag != ModelTag::singular)
    throw error("identity pattern search requires the singular model");
  if (n < 1 || n > 3) throw error("identity pattern size out of range [1, 3]");
  if (trials == 0) throw error("identity pattern search needs trials");

  IdentitySearch result;
  result.pattern_size = n;
  result.trials = trials;

  std::vector<double> depths;
  depths.reserve(trials);
  RunningStat stat;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng = purpose_rng(spec.seed, trial, StreamPurpose::identity_search);
    // window[j] holds the bit pattern of the j-th most recent row
    std::vector<std::uint32_t> window(static_cast<std::size_t>(n), 0u);
    std::size_t rows = 0;
    bool found = false;
    while (rows < kIdentitySearchRowCap) {
      std::uint32_t row = 0;
      for (int c = 0; c < n; ++c)
        row |= static_cast<std::uint32_t>(rng.coin()) << c;
      std::rotate(window.begin(), window.begin() + 1, window.end());
      window.back() = row;
      ++rows;
      if (rows >= static_cast<std::size_t>(n)) {
        bool match = true;
        for (int j = 0; j < n && match; ++j)
          match = window[static_cast<std::size_t>(j)] == (1u << j);
        if (match) {
          found = true;
          break;
        }
      }
    }
    if (!found) continue;
    const double entries = static_cast<double>(rows) * n;
    depths.push_back(entries);
    stat.add(entries);
    ++result.completed;
  }

  if (!depths.empty()) {
    std::sort(depths.begin(), depths.end());
    result.mean_entries = stat.mean();
    result.se_entries = stat.stderror();
    result.median_entries = depths[depths.size() / 2];
    result.max_entries = depths.back();
  }
  result.verdict =
      result.completed == result.trials ? Verdict::pass : Verdict::inconclusive;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "completed %zu/%zu, mean entries %.4g, row cap %zu",
                result.completed, result.trials, result.mean_entries,
                kIdentitySearchRowCap);
  result.notes = buf;
  return result;
}

}  // namespace cidlab
