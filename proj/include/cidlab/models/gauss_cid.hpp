#pragma once

// Dependent Gaussian sequence built from partial sums: X_i = W_i + U_i with
// W_i = Z_1 + ... + Z_i, Z_i ~ N(0, b_i - b_{i-1}), U_i ~ N(0, 1 - b_i), all
// independent. Marginals are standard normal, Cov(X_i, X_j) = b_min(i,j), and
// the predictives concentrate on the limit V = lim W_i.

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cidlab/common.hpp"
#include "cidlab/models/model_spec.hpp"
#include "cidlab/rng.hpp"

namespace cidlab::gauss_cid {

// Conditional variances shrink geometrically fast under the geometric rule
// and eventually fall below double cancellation noise; the floor keeps the
// factorization positive. Distances to the atomic limit are insensitive to
// the floored scale (any continuous density is total-variation distance one
// from an atom), so nothing downstream depends on the garbage digits.
inline constexpr double kMinConditionalVar = 1e-300;

// Incremental Cholesky conditioner over the covariance b_min(i,j) off the
// diagonal and 1 on it. Observations are appended one at a time; each append
// extends the factor by one row, so walking a trajectory's checkpoints costs
// one factorization total instead of one per checkpoint.
class CidConditioner {
 public:
  explicit CidConditioner(const GaussCidParams& params, std::size_t reserve_n = 0)
      : params_(params) {
    if (reserve_n > 0) {
      lower_.reserve(reserve_n * (reserve_n + 1) / 2);
      z_.reserve(reserve_n);
    }
  }

  std::size_t size() const { return z_.size(); }

  // Mean and standard deviation of X_{n+1} given the pushed history.
  std::pair<double, double> predictive() const {
    ensure_row();
    double mean = 0.0;
    for (std::size_t j = 0; j < z_.size(); ++j) mean += row_[j] * z_[j];
    return {mean, pivot_};
  }

  // Predictive parameters one step further out, as if x_next were observed.
  // Row n+1 of the factor shares its leading entries with the current
  // candidate row, which makes this O(n) instead of a fresh factorization.
  std::pair<double, double> lookahead(double x_next) const {
    ensure_row();
    const std::size_t n = z_.size();
    double mean_n = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean_n += row_[j] * z_[j];
    const double cov_next = cid_b(params_, n + 1);
    const double y_tail = (cov_next - row_sum_sq_) / pivot_;
    double var = 1.0 - row_sum_sq_ - y_tail * y_tail;
    if (var < kMinConditionalVar) var = kMinConditionalVar;
    const double z_next = (x_next - mean_n) / pivot_;
    return {mean_n + y_tail * z_next, std::sqrt(var)};
  }

  void push(double x) {
    if (z_.size() >= max_history(ModelTag::gauss_cid))
      throw error("history too long for dense conditioning");
    ensure_row();
    const std::size_t n = z_.size();
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += row_[j] * z_[j];
    lower_.insert(lower_.end(), row_.begin(), row_.end());
    lower_.push_back(pivot_);
    z_.push_back((x - mean) / pivot_);
    row_ready_ = false;
  }

 private:
  static std::size_t row_offset(std::size_t r) { return r * (r + 1) / 2; }

  // Computes the candidate next factor row: the forward solve of the
  // covariance column (b_1, ..., b_n) against the factor built so far.
  void ensure_row() const {
    if (row_ready_) return;
    const std::size_t n = z_.size();
    row_.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double s = cid_b(params_, j + 1);
      const std::size_t off = row_offset(j);
      for (std::size_t k = 0; k < j; ++k) s -= row_[k] * lower_[off + k];
      row_[j] = s / lower_[off + j];
    }
    double sum_sq = 0.0;
    for (double v : row_) sum_sq += v * v;
    row_sum_sq_ = sum_sq;
    double var = 1.0 - sum_sq;
    if (var < kMinConditionalVar) var = kMinConditionalVar;
    pivot_ = std::sqrt(var);
    row_ready_ = true;
  }

  GaussCidParams params_;
  std::vector<double> lower_;  // packed rows of the Cholesky factor
  std::vector<double> z_;      // forward-solved observations
  mutable std::vector<double> row_;
  mutable double row_sum_sq_ = 0.0;
  mutable double pivot_ = 1.0;
  mutable bool row_ready_ = false;
};

inline std::vector<double> simulate(const GaussCidParams& p, std::size_t n,
                                    Rng& rng, std::vector<double>& w_partial) {
  w_partial.clear();
  w_partial.reserve(n);
  std::vector<double> xs;
  xs.reserve(n);
  double w = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double z_var = cid_one_minus_b(p, i - 1) - cid_one_minus_b(p, i);
    w += rng.normal(0.0, std::sqrt(z_var));
    w_partial.push_back(w);
    const double u = rng.normal(0.0, std::sqrt(cid_one_minus_b(p, i)));
    xs.push_back(w + u);
  }
  return xs;
}

}  // namespace cidlab::gauss_cid
