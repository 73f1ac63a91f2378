#pragma once

// Random variates and densities used by the samplers: normal, gamma,
// inverse-gamma (rate convention), inverse-Gaussian, and a location-free
// scaled Student-t. Also the scale-tuning rule for the t fusion prior.

#include <cmath>
#include <cstddef>
#include <numbers>

#include "tfuse/error.hpp"
#include "tfuse/rng.hpp"
#include "tfuse/special.hpp"

namespace tfuse {

inline double sample_standard_normal(RngStream& rng) {
  return special::normal_quantile(rng.uniform());
}

inline double sample_normal(double mean, double sd, RngStream& rng) {
  return mean + sd * sample_standard_normal(rng);
}

namespace detail {

// log of a Gamma(shape, 1) variate. Marsaglia-Tsang squeeze for shape >= 1,
// boosted through U^(1/shape) below that. Working in logs keeps tiny shapes
// from underflowing.
inline double log_gamma_variate(double shape, RngStream& rng) {
  if (shape < 1.0) {
    const double log_u = std::log(rng.uniform());
    return log_gamma_variate(shape + 1.0, rng) + log_u / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = sample_standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

}  // namespace detail

/// Gamma with density proportional to x^(shape-1) exp(-rate x).
inline double sample_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate))
    throw DomainError("gamma: shape and rate must be positive and finite");
  return std::exp(detail::log_gamma_variate(shape, rng)) / rate;
}

/// Inverse-gamma with density proportional to x^(-shape-1) exp(-rate/x).
inline double sample_inverse_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate))
    throw DomainError("inverse_gamma: shape and rate must be positive and finite");
  return std::exp(std::log(rate) - detail::log_gamma_variate(shape, rng));
}

/// Inverse-Gaussian with density proportional to
/// x^(-3/2) exp(-shape (x - mean)^2 / (2 mean^2 x)).
/// Michael-Schucany-Haas transformation, written so the small root never
/// cancels when mean/shape is large.
inline double sample_inverse_gaussian(double mean, double shape, RngStream& rng) {
  if (!(mean > 0.0) || !(shape > 0.0) || !std::isfinite(mean) || !std::isfinite(shape))
    throw DomainError("inverse_gaussian: mean and shape must be positive and finite");
  const double z = sample_standard_normal(rng);
  const double phi = mean * z * z / (2.0 * shape);
  const double x = mean / (1.0 + phi + std::sqrt(phi * (phi + 2.0)));
  const double u = rng.uniform();
  if (u * (mean + x) <= mean) return x;
  return mean * (mean / x);
}

/// Closed-form inverse-Gaussian CDF.
inline double inverse_gaussian_cdf(double x, double mean, double shape) {
  if (x <= 0.0) return 0.0;
  const double r = std::sqrt(shape / x);
  return special::normal_cdf(r * (x / mean - 1.0)) +
         std::exp(2.0 * shape / mean + special::log_normal_cdf(-r * (x / mean + 1.0)));
}

/// P(X <= x) for X ~ InverseGamma(shape, rate), i.e. P(1/X >= 1/x) with 1/X ~ Gamma(shape, rate).
inline double inverse_gamma_cdf(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return special::gamma_q(shape, rate / x);
}

// ---------------------------------------------------------------------------
// Student-t

inline double student_t_log_pdf(double x, double df) {
  return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
         0.5 * std::log(df * std::numbers::pi) - 0.5 * (df + 1.0) * std::log1p(x * x / df);
}

/// P(T >= x) for x >= 0.
inline double student_t_upper_tail(double df, double x) {
  if (x <= 0.0) return 0.5;
  if (std::isinf(x)) return 0.0;
  const double x2 = x * x;
  // The direct form keeps relative accuracy in the far tail; near the centre
  // the complementary form avoids losing digits of 1 - (tiny).
  const double direct = 0.5 * special::beta_inc(0.5 * df, 0.5, df / (df + x2));
  if (direct < 0.25) return direct;
  return 0.5 - 0.5 * special::beta_inc(0.5, 0.5 * df, x2 / (df + x2));
}

inline double student_t_cdf(double df, double x) {
  if (!(df > 0.0)) throw DomainError("student_t_cdf: df must be positive");
  return x >= 0.0 ? 1.0 - student_t_upper_tail(df, x) : student_t_upper_tail(df, -x);
}

/// Inverse CDF. Solves on the nearer tail (no 1 - p cancellation), bracketing
/// and bisecting first, then polishing with Newton steps kept inside the bracket.
inline double student_t_quantile(double df, double p) {
  if (!(df > 0.0)) throw DomainError("student_t_quantile: df must be positive");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("student_t_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  const double tail = p < 0.5 ? p : 1.0 - p;
  const double sign = p < 0.5 ? -1.0 : 1.0;

  double lo = 0.0;
  double hi = 1.0;
  while (student_t_upper_tail(df, hi) > tail) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return sign * hi;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-9 * (1.0 + hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_upper_tail(df, mid) > tail)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 8; ++i) {
    const double f = student_t_upper_tail(df, x) - tail;
    const double slope = -std::exp(student_t_log_pdf(x, df));
    const double next = x - f / slope;
    if (!(next > lo && next < hi) || next == x) break;
    x = next;
  }
  return sign * x;
}

/// Student-t with `df` degrees of freedom scaled by `scale` (no location).
struct ScaledT {
  double df;
  double scale;

  ScaledT(double df_, double scale_) : df(df_), scale(scale_) {
    if (!(df > 0.0) || !(scale > 0.0) || !std::isfinite(df) || !std::isfinite(scale))
      throw DomainError("ScaledT: df and scale must be positive and finite");
  }

  /// The inverse-gamma mixing representation: df = 2 a_t, scale = sqrt(b_t / a_t).
  static ScaledT from_mixing(double a_t, double b_t) {
    return ScaledT(2.0 * a_t, std::sqrt(b_t / a_t));
  }
};

inline double scaled_t_log_density(double x, const ScaledT& dist) {
  return student_t_log_pdf(x / dist.scale, dist.df) - std::log(dist.scale);
}

struct TuneResult {
  double scale;
  double b_t;
};

/// Scale s such that P(|t_df(s)| >= sqrt(log n / n)) = 1/n, with the matching
/// inverse-gamma rate b_t = (df / 2) s^2.
inline TuneResult solve_tune_scale(std::size_t n, double df) {
  if (n < 3) throw DomainError("solve_tune_scale: n must be at least 3");
  if (!(df > 0.0)) throw DomainError("solve_tune_scale: df must be positive");
  const double nd = static_cast<double>(n);
  const double threshold = std::sqrt(std::log(nd) / nd);
  const double s = threshold / student_t_quantile(df, 1.0 - 1.0 / (2.0 * nd));
  return {s, 0.5 * df * s * s};
}

}  // namespace tfuse
