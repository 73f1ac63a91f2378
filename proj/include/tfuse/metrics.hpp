#pragma once

// Evaluation statistics: estimation errors, adjacency recovery R, within- and
// between-block statistics W / B / B-tilde, the thresholded jump set, and
// posterior summaries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tfuse/distributions.hpp"
#include "tfuse/error.hpp"
#include "tfuse/model.hpp"

namespace tfuse {

/// Symmetric binary n x n matrix, omega_ij = 1 when i and j share a value.
class Adjacency {
 public:
  explicit Adjacency(std::size_t n) : n_(n), data_(n * n, 0) {}

  std::size_t size() const noexcept { return n_; }
  bool operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v) {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }
  bool operator==(const Adjacency&) const = default;

 private:
  std::size_t n_;
  std::vector<std::uint8_t> data_;
};

/// omega_ij = 1{|theta_i - theta_j| / sigma <= threshold}. threshold = 0 is
/// exact equality; +inf gives all ones.
inline Adjacency adjacency_threshold(std::span<const double> theta, double sigma, double threshold) {
  if (!(sigma > 0.0)) throw DomainError("adjacency: sigma must be positive");
  const std::size_t n = theta.size();
  Adjacency adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    adj.set(i, i, true);
    for (std::size_t j = i + 1; j < n; ++j) adj.set(i, j, std::abs(theta[i] - theta[j]) / sigma <= threshold);
  }
  return adj;
}

inline Adjacency adjacency_true(std::span<const double> theta_star) {
  return adjacency_threshold(theta_star, 1.0, 0.0);
}

/// The (1 - 1/2n) prior quantile of a scaled difference: s * t_{2 a_t, 1-1/2n}
/// for t-type priors, log(n) / lambda for the Laplace prior.
inline double bayes_threshold(const PriorSpec& prior, std::size_t n) {
  const double nd = static_cast<double>(n);
  auto t_threshold = [&](const THyper& t) {
    t.validate();
    return t.scale() * student_t_quantile(t.df(), 1.0 - 1.0 / (2.0 * nd));
  };
  if (const auto* t = std::get_if<THyper>(&prior)) return t_threshold(*t);
  if (const auto* f = std::get_if<FixedRankHyper>(&prior)) return t_threshold(f->t);
  if (const auto* a = std::get_if<AdaptiveRankHyper>(&prior)) return t_threshold(a->t);
  if (const auto* l = std::get_if<LaplaceHyper>(&prior)) {
    l->validate();
    return std::log(nd) / l->lambda;
  }
  throw ConfigError("adjacency_bayes: no difference-prior threshold for prior '" + prior_tag(prior) + "'");
}

inline Adjacency adjacency_bayes(std::span<const double> theta_hat, double sigma_hat, const PriorSpec& prior,
                                 std::size_t n) {
  return adjacency_threshold(theta_hat, sigma_hat, bayes_threshold(prior, n));
}

/// Sum over all ordered pairs (i, j) of |omega_hat_ij - omega_ij|.
inline double r_statistic(const Adjacency& estimate, const Adjacency& truth) {
  if (estimate.size() != truth.size()) throw DimensionError("r_statistic: dimension mismatch");
  double count = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t j = 0; j < truth.size(); ++j) count += estimate(i, j) != truth(i, j);
  return count;
}

namespace detail {
inline void check_pairs(std::span<const double> theta_hat, const Adjacency& truth) {
  if (theta_hat.size() != truth.size()) throw DimensionError("block statistic: dimension mismatch");
}

inline std::vector<double> between_gaps(std::span<const double> theta_hat, const Adjacency& truth) {
  check_pairs(theta_hat, truth);
  std::vector<double> gaps;
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t j = i + 1; j < truth.size(); ++j)
      if (!truth(i, j)) gaps.push_back(std::abs(theta_hat[i] - theta_hat[j]));
  if (gaps.empty()) throw UndefinedStatistic("no between-block pairs");
  return gaps;
}
}  // namespace detail

/// Average |theta_i - theta_j| over distinct pairs in the same true block.
inline double w_statistic(std::span<const double> theta_hat, const Adjacency& truth) {
  detail::check_pairs(theta_hat, truth);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t j = i + 1; j < truth.size(); ++j)
      if (truth(i, j)) {
        sum += std::abs(theta_hat[i] - theta_hat[j]);
        ++count;
      }
  if (count == 0) throw UndefinedStatistic("no within-block pairs");
  return sum / static_cast<double>(count);
}

/// Minimum |theta_i - theta_j| over pairs in different true blocks.
inline double b_statistic(std::span<const double> theta_hat, const Adjacency& truth) {
  const auto gaps = detail::between_gaps(theta_hat, truth);
  return *std::min_element(gaps.begin(), gaps.end());
}

/// Lower empirical q-quantile (order statistic ceil(q m)) of the between-block gaps.
inline double b_tilde_statistic(std::span<const double> theta_hat, const Adjacency& truth, double q = 0.10) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("b_tilde_statistic: q must lie in (0, 1]");
  auto gaps = detail::between_gaps(theta_hat, truth);
  const auto m = static_cast<double>(gaps.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * m - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, gaps.size());
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(rank - 1), gaps.end());
  return gaps[rank - 1];
}

/// epsilon_n and the per-difference selection threshold epsilon_n / n.
struct SelectionConfig {
  double epsilon_n;
  std::size_t n;

  static SelectionConfig for_size(std::size_t n) {
    const double nd = static_cast<double>(n);
    return {std::sqrt(std::log(nd) / nd), n};
  }
  double threshold() const { return epsilon_n / static_cast<double>(n); }
};

/// Detected jump set: 0-based i >= 1 with |theta_i - theta_{i-1}| / sigma >= threshold.
inline std::vector<std::size_t> selection_set(std::span<const double> theta, double sigma, double threshold) {
  if (!(sigma > 0.0)) throw DomainError("selection_set: sigma must be positive");
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < theta.size(); ++i)
    if (std::abs(theta[i] - theta[i - 1]) / sigma >= threshold) out.push_back(i);
  return out;
}

inline std::vector<std::size_t> selection_set(std::span<const double> theta, double sigma,
                                              const SelectionConfig& cfg) {
  return selection_set(theta, sigma, cfg.threshold());
}

struct PointErrors {
  double l2;
  double l1;
};

inline PointErrors point_errors(std::span<const double> theta_hat, std::span<const double> theta_star) {
  if (theta_hat.size() != theta_star.size()) throw DimensionError("point_errors: dimension mismatch");
  double sq = 0.0;
  double abs = 0.0;
  for (std::size_t i = 0; i < theta_hat.size(); ++i) {
    const double d = theta_hat[i] - theta_star[i];
    sq += d * d;
    abs += std::abs(d);
  }
  return {std::sqrt(sq), abs};
}

inline std::vector<double> posterior_mean(const DrawMatrix<double>& draws) {
  if (draws.rows() == 0) throw UndefinedStatistic("posterior_mean: no draws");
  std::vector<double> mean(draws.cols(), 0.0);
  for (std::size_t r = 0; r < draws.rows(); ++r) {
    const auto row = draws.row(r);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += row[c];
  }
  for (double& v : mean) v /= static_cast<double>(draws.rows());
  return mean;
}

/// Posterior mean of sigma (not sqrt of the mean of sigma^2).
inline double posterior_sigma(std::span<const double> sigma2_draws) {
  if (sigma2_draws.empty()) throw UndefinedStatistic("posterior_sigma: no draws");
  double sum = 0.0;
  for (double v : sigma2_draws) sum += std::sqrt(v);
  return sum / static_cast<double>(sigma2_draws.size());
}

struct PosteriorErrors {
  double l2;
  double l1;
  double post_mean_sq_l2;
};

/// Errors of the posterior mean plus the posterior mean of ||theta - theta*||^2.
inline PosteriorErrors posterior_errors(const DrawMatrix<double>& draws, std::span<const double> theta_star) {
  if (draws.cols() != theta_star.size()) throw DimensionError("posterior_errors: dimension mismatch");
  const auto mean = posterior_mean(draws);
  const PointErrors pe = point_errors(mean, theta_star);
  double msq = 0.0;
  for (std::size_t r = 0; r < draws.rows(); ++r) {
    const auto row = draws.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) msq += (row[c] - theta_star[c]) * (row[c] - theta_star[c]);
  }
  return {pe.l2, pe.l1, msq / static_cast<double>(draws.rows())};
}

inline const std::vector<double>& default_summary_quantiles() {
  static const std::vector<double> q{0.025, 0.25, 0.5, 0.75, 0.975};
  return q;
}

/// Linear-interpolation empirical quantile of sorted data.
inline double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw UndefinedStatistic("quantile of empty sample");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct SummaryRow {
  double mean;
  std::vector<double> quantiles;
};

struct PosteriorSummary {
  std::vector<double> probs;
  std::vector<SummaryRow> rows;  // one per coordinate
};

inline PosteriorSummary summarize_columns(const DrawMatrix<double>& draws, std::span<const double> probs) {
  if (draws.rows() == 0) throw UndefinedStatistic("posterior_summary: no draws");
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("posterior_summary: quantile outside [0, 1]");
  PosteriorSummary out{{probs.begin(), probs.end()}, {}};
  out.rows.reserve(draws.cols());
  std::vector<double> column(draws.rows());
  for (std::size_t c = 0; c < draws.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < draws.rows(); ++r) {
      column[r] = draws(r, c);
      sum += column[r];
    }
    std::sort(column.begin(), column.end());
    SummaryRow row{sum / static_cast<double>(draws.rows()), {}};
    for (double p : probs) row.quantiles.push_back(sorted_quantile(column, p));
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline PosteriorSummary posterior_summary(const PosteriorDraws& draws,
                                          std::span<const double> probs = default_summary_quantiles()) {
  return summarize_columns(draws.theta, probs);
}

/// Summary of a scalar chain (e.g. sigma^2).
inline SummaryRow summarize_scalar(std::span<const double> draws,
                                   std::span<const double> probs = default_summary_quantiles()) {
  DrawMatrix<double> m(draws.size(), 1);
  for (std::size_t r = 0; r < draws.size(); ++r) m(r, 0) = draws[r];
  return summarize_columns(m, probs).rows.front();
}

/// Evaluation of one method on one dataset. Optional fields are not defined
/// for every method.
struct MetricReport {
  double l2_error = 0.0;
  double l1_error = 0.0;
  std::optional<double> post_mean_sq_l2;
  std::optional<double> r;
  double w = 0.0;
  double b = 0.0;  // B or B-tilde depending on the scenario
};

}  // namespace tfuse
