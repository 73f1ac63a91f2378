#pragma once

// Gibbs samplers for the t fusion and Laplace fusion priors on successive
// differences of a Gaussian mean sequence.
//
// The sweep is written against an arbitrary visiting order so that the
// clustering samplers (differences along a permutation) reuse it verbatim;
// the plain fusion samplers pass the identity order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include "tfuse/distributions.hpp"
#include "tfuse/error.hpp"
#include "tfuse/model.hpp"
#include "tfuse/rng.hpp"

namespace tfuse {

struct FullConditional {
  double mu;
  double nu;  // variance
};

/// Test hooks: hold lambda and/or sigma^2 at their initial values, or start
/// from a given state instead of init_chain.
struct SweepHooks {
  bool hold_lambda = false;
  bool hold_sigma2 = false;
  std::optional<ChainState> initial;
};

inline std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

/// theta = y, every lambda = 1, sigma^2 = sample variance of y (floored).
inline ChainState init_chain(const Dataset& data, [[maybe_unused]] RngStream& rng) {
  const auto y = data.y();
  const std::size_t n = y.size();
  if (n < 2) throw DimensionError("init_chain: need n >= 2");
  ChainState s;
  s.theta.assign(y.begin(), y.end());
  s.lambda.assign(n - 1, 1.0);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  s.sigma2 = std::max(ss / static_cast<double>(n - 1), 1e-12);
  return s;
}

namespace detail {

struct VarianceHyper {
  double a_sigma;
  double b_sigma;
  double lambda1;
};

inline VarianceHyper variance_part(const THyper& h) { return {h.a_sigma, h.b_sigma, h.lambda1}; }
inline VarianceHyper variance_part(const LaplaceHyper& h) { return {h.a_sigma, h.b_sigma, h.lambda1}; }

inline void check_order(const ChainState& s, std::span<const double> y, std::span<const std::size_t> order) {
  if (s.theta.size() != y.size() || order.size() != y.size() || s.lambda.size() + 1 != y.size())
    throw DimensionError("sweep: state, data and order sizes disagree");
}

// Full conditional of theta at ordered position `pos`. The first position is
// anchored to a pseudo-neighbour 0 with scale lambda1; the last has no right
// neighbour.
inline FullConditional ordered_full_conditional(std::size_t pos, const ChainState& s,
                                                std::span<const double> y,
                                                std::span<const std::size_t> order, double lambda1) {
  const std::size_t n = order.size();
  const std::size_t j = order[pos];
  double precision = 1.0;  // in units of 1/sigma^2
  double weighted = y[j];
  if (pos == 0) {
    precision += 1.0 / lambda1;
  } else {
    const double w = 1.0 / s.lambda[pos - 1];
    precision += w;
    weighted += w * s.theta[order[pos - 1]];
  }
  if (pos + 1 < n) {
    const double w = 1.0 / s.lambda[pos];
    precision += w;
    weighted += w * s.theta[order[pos + 1]];
  }
  return {weighted / precision, s.sigma2 / precision};
}

inline void update_lambda_t(ChainState& s, std::span<const std::size_t> order, const THyper& h,
                            RngStream& rng) {
  const double shape = h.a_t + 0.5;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const double d = s.theta[order[k + 1]] - s.theta[order[k]];
    const double rate = h.b_t + d * d / (2.0 * s.sigma2);
    if (!std::isfinite(rate)) throw NumericFailure("lambda");
    s.lambda[k] = sample_inverse_gamma(shape, rate, rng);
    if (!(s.lambda[k] > 0.0) || !std::isfinite(s.lambda[k])) throw NumericFailure("lambda");
  }
}

inline constexpr double kMinLaplaceGap = 1e-12;

inline void update_lambda_laplace(ChainState& s, std::span<const std::size_t> order,
                                  const LaplaceHyper& h, RngStream& rng) {
  const double sigma = std::sqrt(s.sigma2);
  const double shape = h.lambda * h.lambda;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const double gap = std::max(std::abs(s.theta[order[k + 1]] - s.theta[order[k]]), kMinLaplaceGap);
    const double mean = h.lambda * sigma / gap;
    if (!std::isfinite(mean) || !(mean > 0.0)) throw NumericFailure("lambda");
    const double inv = sample_inverse_gaussian(mean, shape, rng);
    s.lambda[k] = 1.0 / inv;
    if (!(s.lambda[k] > 0.0) || !std::isfinite(s.lambda[k])) throw NumericFailure("lambda");
  }
}

inline void update_sigma2(ChainState& s, std::span<const double> y, std::span<const std::size_t> order,
                          const VarianceHyper& h, RngStream& rng) {
  const std::size_t n = y.size();
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - s.theta[i];
    quad += r * r;
  }
  const double first = s.theta[order[0]];
  double rate = h.b_sigma + 0.5 * quad + first * first / (2.0 * h.lambda1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double d = s.theta[order[k + 1]] - s.theta[order[k]];
    rate += d * d / (2.0 * s.lambda[k]);
  }
  if (!std::isfinite(rate)) throw NumericFailure("sigma2");
  s.sigma2 = sample_inverse_gamma(h.a_sigma + static_cast<double>(n), rate, rng);
  if (!(s.sigma2 > 0.0) || !std::isfinite(s.sigma2)) throw NumericFailure("sigma2");
}

inline void update_theta(ChainState& s, std::span<const double> y, std::span<const std::size_t> order,
                         double lambda1, RngStream& rng) {
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const FullConditional fc = ordered_full_conditional(pos, s, y, order, lambda1);
    const double v = sample_normal(fc.mu, std::sqrt(fc.nu), rng);
    if (!std::isfinite(v)) throw NumericFailure("theta");
    s.theta[order[pos]] = v;
  }
}

/// One systematic scan: sigma^2, the lambda block, then theta along `order`.
/// Drawing sigma^2 first means the first lambda block already sees a noise
/// level fitted to theta = y rather than the raw sample variance.
template <typename Hyper>
void ordered_sweep(ChainState& s, std::span<const double> y, std::span<const std::size_t> order,
                   const Hyper& h, RngStream& rng, const SweepHooks& hooks = {}) {
  check_order(s, y, order);
  const VarianceHyper vh = variance_part(h);
  if (!hooks.hold_sigma2) update_sigma2(s, y, order, vh, rng);
  if (!hooks.hold_lambda) {
    if constexpr (std::is_same_v<Hyper, THyper>)
      update_lambda_t(s, order, h, rng);
    else
      update_lambda_laplace(s, order, h, rng);
  }
  update_theta(s, y, order, vh.lambda1, rng);
}

}  // namespace detail

/// Gaussian full conditional of theta_i (0-based index) under the identity order.
inline FullConditional theta_full_conditional(std::size_t index, const ChainState& state,
                                              const Dataset& data, double lambda1) {
  const std::size_t n = data.size();
  if (index >= n) throw DimensionError("theta_full_conditional: index out of range");
  if (state.theta.size() != n || state.lambda.size() + 1 != n)
    throw DimensionError("theta_full_conditional: state does not match data");
  const auto order = identity_order(n);
  return detail::ordered_full_conditional(index, state, data.y(), order, lambda1);
}

inline ChainState t_fusion_sweep(ChainState state, const Dataset& data, const THyper& hyper,
                                 RngStream& rng) {
  const auto order = identity_order(data.size());
  detail::ordered_sweep(state, data.y(), order, hyper, rng);
  return state;
}

inline ChainState laplace_fusion_sweep(ChainState state, const Dataset& data,
                                       const LaplaceHyper& hyper, RngStream& rng) {
  const auto order = identity_order(data.size());
  detail::ordered_sweep(state, data.y(), order, hyper, rng);
  return state;
}

namespace detail {

inline PosteriorDraws make_draws(std::size_t n, const SamplerConfig& config, const PriorSpec& prior) {
  PosteriorDraws out{DrawMatrix<double>(config.retained(), n), {}, DrawMeta{config, prior}};
  out.sigma2.reserve(config.retained());
  return out;
}

inline void record(PosteriorDraws& out, const ChainState& s, std::size_t row) {
  std::copy(s.theta.begin(), s.theta.end(), out.theta.row(row).begin());
  out.sigma2.push_back(s.sigma2);
}

template <typename Hyper>
PosteriorDraws run_fusion(const Dataset& data, const Hyper& hyper, const PriorSpec& prior,
                          const SamplerConfig& config, const SweepHooks& hooks) {
  hyper.validate();
  config.validate();
  RngStream rng(config.seed, config.stream_id);
  ChainState state = hooks.initial ? *hooks.initial : init_chain(data, rng);
  state.validate();
  const auto order = identity_order(data.size());
  PosteriorDraws out = make_draws(data.size(), config, prior);
  std::size_t row = 0;
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    try {
      ordered_sweep(state, data.y(), order, hyper, rng, hooks);
    } catch (const NumericFailure& e) {
      throw e.at_iteration(t);
    }
    if (config.keeps(t)) record(out, state, row++);
  }
  return out;
}

}  // namespace detail

/// Runs the t or Laplace fusion Gibbs sampler from init_chain for
/// `config.iterations` sweeps, keeping thinned post-burn-in draws.
inline PosteriorDraws run_fusion_sampler(const Dataset& data, const PriorSpec& prior,
                                         const SamplerConfig& config, const SweepHooks& hooks = {}) {
  if (const auto* t = std::get_if<THyper>(&prior)) return detail::run_fusion(data, *t, prior, config, hooks);
  if (const auto* l = std::get_if<LaplaceHyper>(&prior))
    return detail::run_fusion(data, *l, prior, config, hooks);
  throw ConfigError("run_fusion_sampler: prior must be t or laplace, got " + prior_tag(prior));
}

/// -log pi(theta_i | theta_prev, theta_next, sigma) on a grid, shifted so the
/// minimum is 0.
inline std::vector<double> conditional_neg_log_prior(std::span<const double> grid, double theta_prev,
                                                     double theta_next, double sigma,
                                                     const PriorSpec& prior) {
  if (!(sigma > 0.0)) throw DomainError("conditional_neg_log_prior: sigma must be positive");
  std::vector<double> out(grid.size());
  if (const auto* t = std::get_if<THyper>(&prior)) {
    t->validate();
    const ScaledT dist = ScaledT::from_mixing(t->a_t, t->b_t);
    for (std::size_t g = 0; g < grid.size(); ++g)
      out[g] = -(scaled_t_log_density((grid[g] - theta_prev) / sigma, dist) +
                 scaled_t_log_density((theta_next - grid[g]) / sigma, dist));
  } else if (const auto* l = std::get_if<LaplaceHyper>(&prior)) {
    l->validate();
    for (std::size_t g = 0; g < grid.size(); ++g)
      out[g] = l->lambda * (std::abs(grid[g] - theta_prev) + std::abs(theta_next - grid[g])) / sigma;
  } else {
    throw ConfigError("conditional_neg_log_prior: prior must be t or laplace");
  }
  if (!out.empty()) {
    const double lo = *std::min_element(out.begin(), out.end());
    for (double& v : out) v -= lo;
  }
  return out;
}

}  // namespace tfuse
