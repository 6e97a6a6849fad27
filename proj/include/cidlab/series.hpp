#pragma once

// Shared result shape for the convergence checks: a labelled sequence of
// (index, value) points with an optional Monte Carlo standard error, plus
// the verdict the check reached and the threshold it used.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "cidlab/common.hpp"

namespace cidlab {

struct SeriesPoint {
  double n = 0.0;
  double value = 0.0;
  double se = 0.0;
};

enum class Verdict { pass, fail, inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

inline Verdict verdict_from_name(const std::string& name) {
  if (name == "pass") return Verdict::pass;
  if (name == "fail") return Verdict::fail;
  if (name == "inconclusive") return Verdict::inconclusive;
  throw error("unknown verdict: " + name);
}

struct DiagnosticsSeries {
  std::string label;
  std::vector<SeriesPoint> points;
  Verdict verdict = Verdict::inconclusive;
  double threshold_used = 0.0;
  std::string notes;

  double final_value() const {
    if (points.empty()) throw error("series has no points");
    return points.back().value;
  }
};

namespace detail {

// Ranks with ties averaged, 1-based.
inline std::vector<double> tied_ranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace detail

// Spearman rank correlation of value against index. A series with no
// variation in either coordinate has no defined trend; that case returns 0
// so a flat curve reads as "no trend" rather than an error.
inline double spearman(const std::vector<SeriesPoint>& points) {
  const std::size_t n = points.size();
  if (n < 2) return 0.0;
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = points[i].n;
    ys[i] = points[i].value;
  }
  const auto rx = detail::tied_ranks(xs);
  const auto ry = detail::tied_ranks(ys);
  const double mean = 0.5 * (static_cast<double>(n) + 1.0);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace cidlab
