#pragma once

// Frequentist baselines: the exact 1-D fused lasso (total-variation
// denoising), a sequence-aware cross-validation for its penalty, and the
// fused lasso along the sorted order of the responses.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "tfuse/error.hpp"
#include "tfuse/permutation.hpp"
#include "tfuse/rng.hpp"

namespace tfuse {

struct FusedLassoFit {
  std::vector<double> theta_hat;
  double lambda = 0.0;
  std::vector<std::size_t> block_boundaries;  // 0-based i with theta_hat[i] != theta_hat[i-1]
};

inline std::vector<std::size_t> block_boundaries(std::span<const double> theta) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < theta.size(); ++i)
    if (theta[i] != theta[i - 1]) out.push_back(i);
  return out;
}

/// ||y - theta||^2 / 2 + lambda * sum |theta_i - theta_{i-1}|.
inline double fused_lasso_objective(std::span<const double> y, std::span<const double> theta, double lambda) {
  if (y.size() != theta.size()) throw DimensionError("fused_lasso_objective: size mismatch");
  double fit = 0.0;
  double tv = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    fit += (y[i] - theta[i]) * (y[i] - theta[i]);
    if (i > 0) tv += std::abs(theta[i] - theta[i - 1]);
  }
  return 0.5 * fit + lambda * tv;
}

inline double total_variation(std::span<const double> theta) {
  double tv = 0.0;
  for (std::size_t i = 1; i < theta.size(); ++i) tv += std::abs(theta[i] - theta[i - 1]);
  return tv;
}

/// Exact minimizer by dynamic programming over piecewise-linear derivatives
/// of the message functions (Johnson, 2013). Linear time in practice.
/// Back-substitution copies the successor's value inside the dead zone, so
/// fused coordinates are exactly equal.
inline FusedLassoFit fused_lasso_1d(std::span<const double> y, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("fused_lasso_1d: lambda must be >= 0");
  const std::size_t n = y.size();
  FusedLassoFit fit;
  fit.lambda = lambda;
  if (n == 0) return fit;
  if (n == 1 || lambda == 0.0) {
    fit.theta_hat.assign(y.begin(), y.end());
    fit.block_boundaries = block_boundaries(fit.theta_hat);
    return fit;
  }

  // Knots x with slope/intercept increments (a, b), stored in a window
  // [l, r] of a 2n buffer that grows in both directions.
  std::vector<double> x(2 * n), a(2 * n), b(2 * n);
  std::vector<double> lower(n - 1), upper(n - 1);

  lower[0] = y[0] - lambda;
  upper[0] = y[0] + lambda;
  std::size_t l = n - 1;
  std::size_t r = n;
  x[l] = lower[0];
  x[r] = upper[0];
  a[l] = 1.0;
  b[l] = -y[0] + lambda;
  a[r] = -1.0;
  b[r] = y[0] + lambda;
  double a_first = 1.0;
  double b_first = -y[1] - lambda;
  double a_last = -1.0;
  double b_last = y[1] - lambda;

  for (std::size_t k = 1; k + 1 < n; ++k) {
    // Walk up from the left until the derivative exceeds -lambda.
    double a_lo = a_first;
    double b_lo = b_first;
    std::size_t lo = l;
    for (; lo <= r; ++lo) {
      if (a_lo * x[lo] + b_lo > -lambda) break;
      a_lo += a[lo];
      b_lo += b[lo];
    }
    // Walk down from the right until the derivative drops below lambda.
    double a_hi = a_last;
    double b_hi = b_last;
    std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(r);
    for (; hi >= static_cast<std::ptrdiff_t>(lo); --hi) {
      const auto h = static_cast<std::size_t>(hi);
      if (-a_hi * x[h] - b_hi < lambda) break;
      a_hi += a[h];
      b_hi += b[h];
    }

    lower[k] = (-lambda - b_lo) / a_lo;
    l = lo - 1;
    x[l] = lower[k];
    upper[k] = (lambda + b_hi) / (-a_hi);
    r = static_cast<std::size_t>(hi + 1);
    x[r] = upper[k];

    a[l] = a_lo;
    b[l] = b_lo + lambda;
    a[r] = a_hi;
    b[r] = b_hi + lambda;
    a_first = 1.0;
    b_first = -y[k + 1] - lambda;
    a_last = -1.0;
    b_last = y[k + 1] - lambda;
  }

  // Last coordinate: root of the final derivative.
  double a_lo = a_first;
  double b_lo = b_first;
  for (std::size_t lo = l; lo <= r; ++lo) {
    if (a_lo * x[lo] + b_lo > 0.0) break;
    a_lo += a[lo];
    b_lo += b[lo];
  }
  fit.theta_hat.resize(n);
  fit.theta_hat[n - 1] = -b_lo / a_lo;
  for (std::size_t k = n - 1; k-- > 0;) {
    const double next = fit.theta_hat[k + 1];
    if (next > upper[k])
      fit.theta_hat[k] = upper[k];
    else if (next < lower[k])
      fit.theta_hat[k] = lower[k];
    else
      fit.theta_hat[k] = next;
  }
  fit.block_boundaries = block_boundaries(fit.theta_hat);
  return fit;
}

/// `count` points log-spaced from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw ConfigError("log_grid: need 0 < lo <= hi and count >= 1");
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = (std::log(hi) - std::log(lo)) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = std::exp(std::log(lo) + step * static_cast<double>(i));
  grid.back() = hi;
  return grid;
}

/// Mean squared held-out error of `lambda` under the modulo-fold scheme used
/// by cv_select_lambda.
inline double cv_error(std::span<const double> y, double lambda, std::size_t folds) {
  const std::size_t n = y.size();
  double total = 0.0;
  std::vector<double> kept;
  std::vector<std::size_t> kept_index;
  for (std::size_t fold = 0; fold < folds; ++fold) {
    kept.clear();
    kept_index.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (i % folds != fold) {
        kept.push_back(y[i]);
        kept_index.push_back(i);
      }
    const FusedLassoFit fit = fused_lasso_1d(kept, lambda);
    // Held-out i: average of the fitted values at the nearest kept neighbours.
    std::size_t cursor = 0;  // first kept position with index > i
    for (std::size_t i = fold; i < n; i += folds) {
      while (cursor < kept_index.size() && kept_index[cursor] < i) ++cursor;
      double pred;
      if (cursor == 0)
        pred = fit.theta_hat.front();
      else if (cursor == kept_index.size())
        pred = fit.theta_hat.back();
      else
        pred = 0.5 * (fit.theta_hat[cursor - 1] + fit.theta_hat[cursor]);
      total += (y[i] - pred) * (y[i] - pred);
    }
  }
  return total / static_cast<double>(n);
}

/// K-fold selection for ordered data: fold k holds out indices congruent to
/// k mod `folds`. Returns the grid value with the smallest held-out error,
/// the smallest such lambda on ties. The folds are deterministic; `rng` is
/// accepted for interface stability and not consumed.
inline double cv_select_lambda(std::span<const double> y, std::span<const double> grid, std::size_t folds,
                               [[maybe_unused]] RngStream& rng) {
  if (grid.empty()) throw ConfigError("cv_select_lambda: empty grid");
  if (folds < 2) throw ConfigError("cv_select_lambda: need at least 2 folds");
  if (y.size() < 2 * folds) throw ConfigError("cv_select_lambda: need n >= 2 * folds");
  double best_lambda = grid[0];
  double best_err = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    if (!(lambda >= 0.0)) throw ConfigError("cv_select_lambda: grid values must be >= 0");
    const double err = cv_error(y, lambda, folds);
    if (err < best_err || (err == best_err && lambda < best_lambda)) {
      best_err = err;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

/// Fused lasso along the ascending order of y, reported in original order.
inline FusedLassoFit sorted_fusion_fit(std::span<const double> y, double lambda) {
  const Permutation r = pilot_rank(y);
  const std::vector<double> sorted = r.apply(y);
  FusedLassoFit fit = fused_lasso_1d(sorted, lambda);
  fit.theta_hat = r.unapply<double>(fit.theta_hat);
  fit.block_boundaries = block_boundaries(fit.theta_hat);
  return fit;
}

}  // namespace tfuse
