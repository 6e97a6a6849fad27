#pragma once

// Conjugate Gaussian location model: latent theta ~ N(m0, tau0^2), then
// observations are i.i.d. N(theta, sigma^2). Everything is closed form.

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "cidlab/models/model_spec.hpp"
#include "cidlab/rng.hpp"

namespace cidlab::gauss_conj {

struct Posterior {
  double mean;
  double var;
};

inline Posterior posterior(const GaussConjParams& p,
                           std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double precision =
      1.0 / p.tau0_sq + static_cast<double>(xs.size()) / p.sigma_sq;
  const double mean = (p.m0 / p.tau0_sq + sum / p.sigma_sq) / precision;
  return {mean, 1.0 / precision};
}

// Mean and standard deviation of the next observation given the history.
inline std::pair<double, double> predictive_params(const GaussConjParams& p,
                                                   std::span<const double> xs) {
  const Posterior post = posterior(p, xs);
  return {post.mean, std::sqrt(p.sigma_sq + post.var)};
}

inline std::vector<double> simulate(const GaussConjParams& p, std::size_t n,
                                    Rng& rng, double& theta_out) {
  theta_out = rng.normal(p.m0, std::sqrt(p.tau0_sq));
  const double sd = std::sqrt(p.sigma_sq);
  std::vector<double> xs;
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) xs.push_back(rng.normal(theta_out, sd));
  return xs;
}

}  // namespace cidlab::gauss_conj
