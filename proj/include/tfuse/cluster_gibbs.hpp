#pragma once

// Clustering samplers: t shrinkage on differences along a (pilot or adaptive)
// rank order, and a collapsed Gibbs sampler for a Dirichlet-process mixture
// with conjugate normal base measure.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "tfuse/distributions.hpp"
#include "tfuse/error.hpp"
#include "tfuse/fusion_gibbs.hpp"
#include "tfuse/model.hpp"
#include "tfuse/permutation.hpp"
#include "tfuse/rng.hpp"

namespace tfuse {

struct ClusterDraws {
  DrawMatrix<double> theta;
  std::vector<double> sigma2;
  std::optional<DrawMatrix<int>> assignments;  // DP only
  DrawMeta meta;
  std::size_t rank_updates = 0;

  std::size_t draws() const noexcept { return theta.rows(); }
  std::size_t dimension() const noexcept { return theta.cols(); }

  PosteriorDraws as_posterior() const { return {theta, sigma2, meta}; }
};

/// One sweep of the t fusion sampler with every neighbour relation routed
/// through `r`.
inline ChainState fixed_rank_sweep(ChainState state, const Dataset& data, const Permutation& r,
                                   const THyper& hyper, RngStream& rng) {
  if (r.size() != data.size()) throw DimensionError("fixed_rank_sweep: permutation size mismatch");
  detail::ordered_sweep(state, data.y(), r.order(), hyper, rng);
  return state;
}

/// Fixed-rank sweeps starting from the pilot order; every `r_period`
/// iterations after `r_start` the order is replaced by the rank order of the
/// current theta. `r_start` defaults to the burn-in; kNeverUpdate disables
/// updates.
inline ClusterDraws adaptive_cluster_run(const Dataset& data, const THyper& hyper, const SamplerConfig& config,
                                         std::size_t r_period = 20,
                                         std::optional<std::size_t> r_start = std::nullopt) {
  hyper.validate();
  config.validate();
  if (r_period == 0) throw ConfigError("r_period must be positive");
  const std::size_t start = r_start.value_or(config.burnin);
  if (start > config.iterations) throw ConfigError("r_start must not exceed iterations");

  RngStream rng(config.seed, config.stream_id);
  ChainState state = init_chain(data, rng);
  Permutation r = pilot_rank(data.y());

  PriorSpec prior = r_period == kNeverUpdate ? PriorSpec{FixedRankHyper{hyper}}
                                             : PriorSpec{AdaptiveRankHyper{hyper, r_period, start}};
  ClusterDraws out{DrawMatrix<double>(config.retained(), data.size()), {}, std::nullopt,
                   DrawMeta{config, prior}};
  out.sigma2.reserve(config.retained());
  std::size_t row = 0;
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    try {
      detail::ordered_sweep(state, data.y(), r.order(), hyper, rng);
    } catch (const NumericFailure& e) {
      throw e.at_iteration(t);
    }
    if (r_period != kNeverUpdate && t > start && (t - start) % r_period == 0) {
      r = rank_update(state.theta);
      ++out.rank_updates;
    }
    if (config.keeps(t)) {
      std::copy(state.theta.begin(), state.theta.end(), out.theta.row(row++).begin());
      out.sigma2.push_back(state.sigma2);
    }
  }
  return out;
}

/// Fixed pilot-rank sampler (no order updates).
inline ClusterDraws fixed_rank_run(const Dataset& data, const THyper& hyper, const SamplerConfig& config) {
  return adaptive_cluster_run(data, hyper, config, kNeverUpdate);
}

struct DPHooks {
  bool likelihood = true;  // false samples the partition from the CRP prior alone
};

namespace detail {

inline double normal_log_pdf(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + r * r / var);
}

struct DPCluster {
  std::size_t count = 0;
  double sum = 0.0;
};

}  // namespace detail

/// Collapsed Gibbs for y_i ~ N(theta_i, sigma^2), theta_i ~ G,
/// G ~ DP(N(0, base_var), concentration), sigma^2 ~ IG(a_sigma, b_sigma).
/// Cluster means are integrated out for the assignment step, then drawn from
/// their conjugate conditionals together with the shared sigma^2.
inline ClusterDraws dp_mixture_run(const Dataset& data, const DPHyper& hyper, const SamplerConfig& config,
                                   const DPHooks& hooks = {}) {
  hyper.validate();
  config.validate();
  const auto y = data.y();
  const std::size_t n = y.size();
  RngStream rng(config.seed, config.stream_id);

  // Start from singletons; one cluster at the sample variance traps
  // one-at-a-time moves on well separated data.
  std::vector<int> label(n, 0);
  std::vector<detail::DPCluster> clusters(n);
  for (std::size_t i = 0; i < n; ++i) {
    label[i] = static_cast<int>(i);
    clusters[i].count = 1;
    clusters[i].sum = y[i];
  }
  double sigma2 = init_chain(data, rng).sigma2;

  ClusterDraws out{DrawMatrix<double>(config.retained(), n), {}, DrawMatrix<int>(config.retained(), n),
                   DrawMeta{config, PriorSpec{hyper}}};
  out.sigma2.reserve(config.retained());

  std::vector<double> logw;
  std::vector<int> slot;
  std::vector<int> relabel;
  std::vector<double> mu;
  const double log_alpha = std::log(hyper.concentration);
  std::size_t row = 0;

  for (std::size_t t = 1; t <= config.iterations; ++t) {
    // Assignments.
    for (std::size_t i = 0; i < n; ++i) {
      auto& own = clusters[static_cast<std::size_t>(label[i])];
      own.count--;
      own.sum -= y[i];
      if (own.count == 0) own.sum = 0.0;

      logw.clear();
      slot.clear();
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < clusters.size(); ++k) {
        if (clusters[k].count == 0) continue;
        double w = std::log(static_cast<double>(clusters[k].count));
        if (hooks.likelihood) {
          const double v = 1.0 / (1.0 / hyper.base_var + static_cast<double>(clusters[k].count) / sigma2);
          w += detail::normal_log_pdf(y[i], v * clusters[k].sum / sigma2, sigma2 + v);
        }
        logw.push_back(w);
        slot.push_back(static_cast<int>(k));
        best = std::max(best, w);
      }
      double w_new = log_alpha;
      if (hooks.likelihood) w_new += detail::normal_log_pdf(y[i], 0.0, hyper.base_var + sigma2);
      logw.push_back(w_new);
      slot.push_back(-1);
      best = std::max(best, w_new);

      double total = 0.0;
      for (double& w : logw) {
        w = std::exp(w - best);
        total += w;
      }
      if (!std::isfinite(total) || !(total > 0.0)) throw NumericFailure("assignment", t);
      double u = rng.uniform() * total;
      std::size_t pick = logw.size() - 1;
      for (std::size_t k = 0; k < logw.size(); ++k) {
        if (u < logw[k]) {
          pick = k;
          break;
        }
        u -= logw[k];
      }
      int target = slot[pick];
      if (target < 0) {
        target = -1;
        for (std::size_t k = 0; k < clusters.size(); ++k)
          if (clusters[k].count == 0) {
            target = static_cast<int>(k);
            break;
          }
        if (target < 0) {
          clusters.emplace_back();
          target = static_cast<int>(clusters.size() - 1);
        }
      }
      label[i] = target;
      clusters[static_cast<std::size_t>(target)].count++;
      clusters[static_cast<std::size_t>(target)].sum += y[i];
    }

    // Compact labels in order of first appearance.
    relabel.assign(clusters.size(), -1);
    std::vector<detail::DPCluster> compact;
    for (std::size_t i = 0; i < n; ++i) {
      const auto old = static_cast<std::size_t>(label[i]);
      if (relabel[old] < 0) {
        relabel[old] = static_cast<int>(compact.size());
        compact.push_back(clusters[old]);
      }
      label[i] = relabel[old];
    }
    clusters = std::move(compact);

    // Cluster means and the shared variance.
    mu.resize(clusters.size());
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      if (hooks.likelihood) {
        const double v = 1.0 / (1.0 / hyper.base_var + static_cast<double>(clusters[k].count) / sigma2);
        mu[k] = sample_normal(v * clusters[k].sum / sigma2, std::sqrt(v), rng);
      } else {
        mu[k] = sample_normal(0.0, std::sqrt(hyper.base_var), rng);
      }
      if (!std::isfinite(mu[k])) throw NumericFailure("cluster mean", t);
    }
    if (hooks.likelihood) {
      double quad = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - mu[static_cast<std::size_t>(label[i])];
        quad += r * r;
      }
      sigma2 = sample_inverse_gamma(hyper.a_sigma + 0.5 * static_cast<double>(n), hyper.b_sigma + 0.5 * quad, rng);
    } else {
      sigma2 = sample_inverse_gamma(hyper.a_sigma, hyper.b_sigma, rng);
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw NumericFailure("sigma2", t);

    if (config.keeps(t)) {
      auto theta_row = out.theta.row(row);
      auto label_row = out.assignments->row(row);
      for (std::size_t i = 0; i < n; ++i) {
        theta_row[i] = mu[static_cast<std::size_t>(label[i])];
        label_row[i] = label[i];
      }
      out.sigma2.push_back(sigma2);
      ++row;
    }
  }
  return out;
}

/// Number of distinct labels in each retained DP draw.
inline std::vector<std::size_t> cluster_counts(const DrawMatrix<int>& assignments) {
  std::vector<std::size_t> out(assignments.rows());
  for (std::size_t r = 0; r < assignments.rows(); ++r) {
    int hi = -1;
    for (int v : assignments.row(r)) hi = std::max(hi, v);
    out[r] = static_cast<std::size_t>(hi + 1);
  }
  return out;
}

}  // namespace tfuse
