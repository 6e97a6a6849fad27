#pragma once

// Facade over the four generative models: trajectories, predictive measures,
// directing measures, joint densities, and the density-ratio route. The two
// ways of reaching a predictive (closed-form updates here, joint-density
// ratios below) are kept deliberately separate so they can cross-check each
// other in tests.

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cidlab/common.hpp"
#include "cidlab/grid_density.hpp"
#include "cidlab/linalg.hpp"
#include "cidlab/mixed_measure.hpp"
#include "cidlab/models/gauss_cid.hpp"
#include "cidlab/models/gauss_conj.hpp"
#include "cidlab/models/model_spec.hpp"
#include "cidlab/models/polya.hpp"
#include "cidlab/models/singular.hpp"
#include "cidlab/rng.hpp"

namespace cidlab {

using singular::WeightSequence;

struct Trajectory {
  ModelSpec spec;
  std::uint64_t replicate = 0;
  std::uint64_t rng_key = 0;
  std::vector<double> observations;
  // latent state, filled according to spec.tag
  double theta = 0.0;                       // gauss-conj location
  std::vector<double> w_partial;            // gauss-cid partial sums of Z
  WeightSequence weights;                   // singular weight draw
  std::vector<std::uint64_t> y_masks;       // singular coin rows
  std::vector<std::uint64_t> color_counts;  // polya final urn counts
};

struct DirectingMeasure {
  MixedMeasure measure;
  bool is_proxy = false;
  std::uint64_t proxy_horizon = 0;
  double proxy_bias_estimate = 0.0;  // observed drift when the horizon doubles
  double tail_stddev = 0.0;          // gauss-cid: scale of the ignored tail
  double location_bound = 0.0;       // singular: sure atom-location error
};

inline Trajectory sample_trajectory(const ModelSpec& spec, std::size_t n,
                                    std::uint64_t replicate = 0) {
  validate(spec);
  if (n < 1 || n > max_history(spec.tag))
    throw error("trajectory length out of range");
  Trajectory traj;
  traj.spec = spec;
  traj.replicate = replicate;
  traj.rng_key = substream_key(spec.seed, replicate);
  Rng rng = purpose_rng(spec.seed, replicate, StreamPurpose::trajectory);
  switch (spec.tag) {
    case ModelTag::polya:
      traj.observations = polya::simulate(spec.polya, n, rng, traj.color_counts);
      break;
    case ModelTag::gauss_conj:
      traj.observations = gauss_conj::simulate(spec.conj, n, rng, traj.theta);
      break;
    case ModelTag::gauss_cid:
      traj.observations = gauss_cid::simulate(spec.cid, n, rng, traj.w_partial);
      break;
    case ModelTag::singular:
      traj.weights = singular::sample_weights(spec.singular.depth, rng);
      traj.observations =
          singular::simulate(traj.weights, n, rng, traj.y_masks);
      break;
  }
  return traj;
}

// Mean and standard deviation of the next observation, for the two models
// whose predictives are Gaussian.
inline std::pair<double, double> predictive_gaussian(
    const ModelSpec& spec, std::span<const double> history) {
  validate(spec);
  if (history.size() > max_history(spec.tag))
    throw error("history too long for dense conditioning");
  switch (spec.tag) {
    case ModelTag::gauss_conj:
      return gauss_conj::predictive_params(spec.conj, history);
    case ModelTag::gauss_cid: {
      gauss_cid::CidConditioner cond(spec.cid, history.size());
      for (double x : history) cond.push(x);
      return cond.predictive();
    }
    default:
      throw error("predictive is not Gaussian for this model");
  }
}

// Degenerate predictives (the dependent Gaussian model collapses onto its
// limit) still need a drawable grid; the floor keeps grid nodes bitwise
// distinct around the mean. Distances against atomic limits are insensitive
// to the rendered width.
inline double render_sd(double mean, double sd) {
  const double floor = (std::abs(mean) + 1.0) * 1e-12;
  return sd < floor ? floor : sd;
}

inline MixedMeasure predictive(const ModelSpec& spec,
                               std::span<const double> history) {
  validate(spec);
  if (history.size() > max_history(spec.tag))
    throw error("history too long for dense conditioning");
  switch (spec.tag) {
    case ModelTag::polya: {
      const auto counts =
          polya::counts_from_history(spec.polya.weights.size(), history);
      return MixedMeasure::on_labels(
          polya::predictive_masses(spec.polya.weights, counts));
    }
    case ModelTag::gauss_conj: {
      const auto [mean, sd] = gauss_conj::predictive_params(spec.conj, history);
      return MixedMeasure::gaussian(mean, sd);
    }
    case ModelTag::gauss_cid: {
      const auto [mean, sd] = predictive_gaussian(spec, history);
      return MixedMeasure::gaussian(mean, render_sd(mean, sd));
    }
    case ModelTag::singular:
      throw error("predictive density intractable; use fd_density_small_n");
  }
  throw error("unknown model tag");
}

inline DirectingMeasure directing(const ModelSpec& spec, const Trajectory& traj,
                                  std::uint64_t proxy_horizon = 100000) {
  validate(spec);
  if (spec.tag != traj.spec.tag)
    throw error("trajectory was sampled from a different model");
  switch (spec.tag) {
    case ModelTag::polya: {
      // No closed form on the same sample path; run the urn to a long proxy
      // horizon and report the drift over a doubling as a bias estimate.
      const std::uint64_t horizon =
          std::max<std::uint64_t>(proxy_horizon, traj.observations.size());
      Rng rng = purpose_rng(traj.spec.seed, traj.replicate,
                            StreamPurpose::trajectory);
      std::vector<std::uint64_t> counts;
      const auto draws =
          polya::simulate(traj.spec.polya, 2 * horizon, rng, counts);
      std::vector<std::uint64_t> at_horizon(traj.spec.polya.weights.size(), 0);
      for (std::uint64_t i = 0; i < horizon; ++i)
        ++at_horizon[static_cast<std::size_t>(draws[i])];
      const auto near_masses =
          polya::predictive_masses(traj.spec.polya.weights, at_horizon);
      const auto far_masses =
          polya::predictive_masses(traj.spec.polya.weights, counts);
      double bias = 0.0;  // half L1 over the shared label set
      for (std::size_t j = 0; j < near_masses.size(); ++j)
        bias += std::abs(near_masses[j] - far_masses[j]);
      return {MixedMeasure::on_labels(near_masses), true, horizon, 0.5 * bias,
              0.0, 0.0};
    }
    case ModelTag::gauss_conj:
      return {MixedMeasure::gaussian(traj.theta, std::sqrt(spec.conj.sigma_sq)),
              false, 0, 0.0, 0.0, 0.0};
    case ModelTag::gauss_cid: {
      if (traj.w_partial.empty()) throw error("trajectory latent state missing");
      const std::size_t n = traj.w_partial.size();
      return {MixedMeasure::dirac(traj.w_partial.back()), true, n, 0.0,
              std::sqrt(cid_one_minus_b(spec.cid, n)), 0.0};
    }
    case ModelTag::singular: {
      if (traj.weights.depth == 0)
        throw error("trajectory latent state missing");
      return {singular::directing_atoms(traj.weights), false, 0, 0.0, 0.0,
              singular::beyond_truncation_bound(traj.weights.depth)};
    }
  }
  throw error("unknown model tag");
}

namespace detail {

inline std::vector<double> joint_covariance(const ModelSpec& spec,
                                            std::size_t n) {
  std::vector<double> cov(n * n);
  if (spec.tag == ModelTag::gauss_conj) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        cov[i * n + j] = spec.conj.tau0_sq + (i == j ? spec.conj.sigma_sq : 0.0);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        cov[i * n + j] =
            i == j ? 1.0 : cid_b(spec.cid, std::min(i, j) + 1);
  }
  return cov;
}

inline void require_joint_model(const ModelSpec& spec, std::size_t n) {
  validate(spec);
  if (spec.tag != ModelTag::gauss_conj && spec.tag != ModelTag::gauss_cid)
    throw error("joint density not exposed for this model");
  if (n < 1 || n > 50) throw error("joint density limited to 50 observations");
}

}  // namespace detail

inline double joint_density(const ModelSpec& spec,
                            std::span<const double> point) {
  detail::require_joint_model(spec, point.size());
  const std::size_t n = point.size();
  const std::vector<double> mean(
      n, spec.tag == ModelTag::gauss_conj ? spec.conj.m0 : 0.0);
  return std::exp(gaussian_log_density(detail::joint_covariance(spec, n), n,
                                       mean, point));
}

// Predictive density as the ratio of consecutive joint densities, evaluated
// on a grid. This route never touches the closed-form updates, which is the
// point: it is the independent leg of the consistency check.
inline GridDensity predictive_density_ratio(const ModelSpec& spec,
                                            std::span<const double> history,
                                            const GridSpec& grid) {
  const std::size_t n = history.size();
  detail::require_joint_model(spec, n + 1);
  const double mean0 = spec.tag == ModelTag::gauss_conj ? spec.conj.m0 : 0.0;
  auto cov = detail::joint_covariance(spec, n + 1);
  cholesky_in_place(cov, n + 1);
  // leading n-by-n block of the factor is the factor of the n-point history
  std::vector<double> y(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = history[i] - mean0;
    for (std::size_t k = 0; k < i; ++k) s -= cov[i * (n + 1) + k] * y[k];
    y[i] = s / cov[i * (n + 1) + i];
  }
  const double pivot = cov[n * (n + 1) + n];
  double partial = 0.0;
  for (std::size_t k = 0; k < n; ++k) partial += cov[n * (n + 1) + k] * y[k];
  // log g_{n+1}(history, x) - log g_n(history) reduces to the last row's
  // contribution; each grid node costs O(1) after the shared solve above.
  const double log_norm = -0.5 * std::log(2.0 * kPi) - std::log(pivot);
  std::vector<double> values(grid.points);
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double x = grid.lo + static_cast<double>(i) * grid.step();
    const double y_last = (x - mean0 - partial) / pivot;
    values[i] = std::exp(log_norm - 0.5 * y_last * y_last);
  }
  return GridDensity(grid.lo, grid.step(), std::move(values));
}

inline singular::FdDensity fd_density_small_n(const ModelSpec& spec,
                                              const WeightSequence& weights,
                                              const GridSpec& grid) {
  validate(spec);
  if (spec.tag != ModelTag::singular)
    throw error("one-dimensional mixture law is only defined for the singular model");
  if (weights.depth != spec.singular.depth)
    throw error("weight sequence depth differs from the model depth");
  return singular::fd_density_small_n(weights, grid);
}

}  // namespace cidlab
