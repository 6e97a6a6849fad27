#pragma once

// Polya urn with unit reinforcement: after observing color j the urn gains
// one ball of that color. Predictive masses are (a_j + count_j) / (A + n).

#include <cstdint>
#include <span>
#include <vector>

#include "cidlab/common.hpp"
#include "cidlab/models/model_spec.hpp"
#include "cidlab/rng.hpp"

namespace cidlab::polya {

inline std::vector<std::uint64_t> counts_from_history(
    std::size_t colors, std::span<const double> history) {
  std::vector<std::uint64_t> counts(colors, 0);
  for (double v : history) {
    const double r = std::floor(v);
    if (r != v || r < 0.0 || r >= static_cast<double>(colors))
      throw error("history contains an unknown color label");
    ++counts[static_cast<std::size_t>(r)];
  }
  return counts;
}

inline std::vector<double> predictive_masses(
    const std::vector<double>& weights,
    const std::vector<std::uint64_t>& counts) {
  double total = 0.0;
  for (double w : weights) total += w;
  double n = 0.0;
  for (std::uint64_t c : counts) n += static_cast<double>(c);
  std::vector<double> masses(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j)
    masses[j] = (weights[j] + static_cast<double>(counts[j])) / (total + n);
  return masses;
}

// Probability of observing exactly this color sequence, as the product of
// predictive masses along the draws. Numerators are multiplied in draw order;
// since the numerator multiset is permutation-invariant and the denominator
// sequence is fixed, two-color swaps compare bit-for-bit equal.
inline double chain_probability(const PolyaParams& params,
                                std::span<const double> labels) {
  const auto counts_check = counts_from_history(params.weights.size(), labels);
  (void)counts_check;
  std::vector<std::uint64_t> counts(params.weights.size(), 0);
  double total = 0.0;
  for (double w : params.weights) total += w;
  double num = 1.0;
  double den = 1.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto j = static_cast<std::size_t>(labels[i]);
    num *= params.weights[j] + static_cast<double>(counts[j]);
    den *= total + static_cast<double>(i);
    ++counts[j];
  }
  return num / den;
}

// Draws n colors sequentially from the urn predictive, consuming exactly one
// uniform per draw so longer runs extend shorter ones on the same stream.
inline std::vector<double> simulate(const PolyaParams& params, std::size_t n,
                                    Rng& rng,
                                    std::vector<std::uint64_t>& counts) {
  counts.assign(params.weights.size(), 0);
  double total = 0.0;
  for (double w : params.weights) total += w;
  std::vector<double> draws;
  draws.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform01() * (total + static_cast<double>(i));
    double acc = 0.0;
    std::size_t pick = params.weights.size() - 1;
    for (std::size_t j = 0; j < params.weights.size(); ++j) {
      acc += params.weights[j] + static_cast<double>(counts[j]);
      if (u < acc) {
        pick = j;
        break;
      }
    }
    ++counts[pick];
    draws.push_back(static_cast<double>(pick));
  }
  return draws;
}

}  // namespace cidlab::polya
