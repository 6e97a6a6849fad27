#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cidlab {

// Thrown by every operation in the library on contract violations. Messages
// are short, stable strings that callers (and the test suite) match on.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Shared numeric conventions. Atom locations closer than kAtomMergeTol are
// treated as the same point; a measure counts as a probability when its total
// mass is within kMassTol of one.
inline constexpr double kAtomMergeTol = 1e-12;
inline constexpr double kMassTol = 1e-9;
inline constexpr std::size_t kDefaultGridPoints = 4096;
inline constexpr double kGaussianGridHalfWidthSds = 8.0;

inline constexpr double kPi = 3.14159265358979323846;

inline double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
}

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

// Closed interval on the real line, used as the K window of L^p norms and
// boundedness diagnostics.
struct CompactWindow {
  double lo = 0.0;
  double hi = 0.0;

  CompactWindow() = default;
  CompactWindow(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi))
      throw error("invalid window: need finite lo < hi");
  }
  double width() const { return hi - lo; }
};

// Streaming mean / standard error (Welford). Used by every Monte Carlo
// diagnostic so that stderr always comes from the same accumulator.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }
  double stderror() const {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace cidlab
