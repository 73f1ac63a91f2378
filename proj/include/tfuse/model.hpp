#pragma once

// Core value types shared by the samplers, solvers and metrics.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tfuse/error.hpp"

namespace tfuse {

/// Observation sequence y with optional known truth.
class Dataset {
 public:
  explicit Dataset(std::vector<double> y, std::optional<std::vector<double>> truth = std::nullopt)
      : y_(std::move(y)), truth_(std::move(truth)) {
    if (y_.size() < 2) throw DimensionError("Dataset: need at least 2 observations");
    for (double v : y_)
      if (!std::isfinite(v)) throw DomainError("Dataset: observations must be finite");
    if (truth_) {
      if (truth_->size() != y_.size()) throw DimensionError("Dataset: truth length differs from y");
      for (double v : *truth_)
        if (!std::isfinite(v)) throw DomainError("Dataset: truth must be finite");
    }
  }

  std::size_t size() const noexcept { return y_.size(); }
  std::span<const double> y() const noexcept { return y_; }
  bool has_truth() const noexcept { return truth_.has_value(); }
  std::span<const double> truth() const {
    if (!truth_) throw DimensionError("Dataset: no truth attached");
    return *truth_;
  }

 private:
  std::vector<double> y_;
  std::optional<std::vector<double>> truth_;
};

namespace detail {
inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw DomainError(std::string(what) + " must be positive and finite");
}
}  // namespace detail

/// t fusion prior: lambda_i ~ IG(a_t, b_t), sigma^2 ~ IG(a_sigma, b_sigma),
/// theta_1 | sigma^2 ~ N(0, sigma^2 lambda1).
struct THyper {
  double a_t = 2.0;
  double b_t = 0.005;
  double a_sigma = 0.5;
  double b_sigma = 0.5;
  double lambda1 = 5.0;

  void validate() const {
    detail::require_positive(a_t, "a_t");
    detail::require_positive(b_t, "b_t");
    detail::require_positive(a_sigma, "a_sigma");
    detail::require_positive(b_sigma, "b_sigma");
    detail::require_positive(lambda1, "lambda1");
  }
  double df() const { return 2.0 * a_t; }
  double scale() const { return std::sqrt(b_t / a_t); }
};

/// Laplace fusion prior with rate lambda / sigma on each difference.
struct LaplaceHyper {
  double lambda = 1.0;
  double a_sigma = 0.5;
  double b_sigma = 0.5;
  double lambda1 = 5.0;

  /// lambda = sqrt(2 log n).
  static LaplaceHyper for_size(std::size_t n) {
    LaplaceHyper h;
    h.lambda = std::sqrt(2.0 * std::log(static_cast<double>(n)));
    return h;
  }

  void validate() const {
    detail::require_positive(lambda, "lambda");
    detail::require_positive(a_sigma, "a_sigma");
    detail::require_positive(b_sigma, "b_sigma");
    detail::require_positive(lambda1, "lambda1");
  }
};

/// Sentinel period meaning "never update the working order".
inline constexpr std::size_t kNeverUpdate = static_cast<std::size_t>(-1);

/// t prior on differences along a pilot order fixed for the whole run.
struct FixedRankHyper {
  THyper t;
};

/// t prior on differences along a working order refreshed from the current
/// theta every `r_period` iterations after iteration `r_start`.
struct AdaptiveRankHyper {
  THyper t;
  std::size_t r_period = 20;
  std::optional<std::size_t> r_start;  // defaults to burn-in
};

/// Dirichlet-process mixture with N(0, base_var) base measure.
struct DPHyper {
  double base_var = 5.0;
  double concentration = 0.1;
  double a_sigma = 0.5;
  double b_sigma = 0.5;

  void validate() const {
    detail::require_positive(base_var, "base_var");
    detail::require_positive(concentration, "concentration");
    detail::require_positive(a_sigma, "a_sigma");
    detail::require_positive(b_sigma, "b_sigma");
  }
};

using PriorSpec = std::variant<THyper, LaplaceHyper, FixedRankHyper, AdaptiveRankHyper, DPHyper>;

inline std::string prior_tag(const PriorSpec& prior) {
  struct {
    std::string operator()(const THyper&) const { return "t"; }
    std::string operator()(const LaplaceHyper&) const { return "laplace"; }
    std::string operator()(const FixedRankHyper&) const { return "fixed-rank"; }
    std::string operator()(const AdaptiveRankHyper&) const { return "adaptive"; }
    std::string operator()(const DPHyper&) const { return "dp"; }
  } visitor;
  return std::visit(visitor, prior);
}

/// Gibbs state: theta, the n-1 latent difference scales (slot k belongs to the
/// difference between ordered positions k+1 and k), and sigma^2.
struct ChainState {
  std::vector<double> theta;
  std::vector<double> lambda;
  double sigma2 = 1.0;

  void validate() const {
    if (lambda.size() + 1 != theta.size()) throw DimensionError("ChainState: lambda must have n-1 entries");
    for (double v : theta)
      if (!std::isfinite(v)) throw NumericFailure("theta");
    for (double v : lambda)
      if (!(v > 0.0) || !std::isfinite(v)) throw NumericFailure("lambda");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw NumericFailure("sigma2");
  }
};

struct SamplerConfig {
  std::size_t iterations = 2000;
  std::size_t burnin = 1000;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  void validate() const {
    if (iterations == 0) throw ConfigError("iterations must be positive");
    if (burnin >= iterations) throw ConfigError("burnin must be smaller than iterations");
    if (thin == 0) throw ConfigError("thin must be positive");
  }
  std::size_t retained() const { return (iterations - burnin + thin - 1) / thin; }
  /// Whether 1-based iteration `t` is kept.
  bool keeps(std::size_t t) const { return t > burnin && (t - burnin - 1) % thin == 0; }
};

/// Dense row-major matrix of draws: one row per retained draw.
template <typename T>
class DrawMatrix {
 public:
  DrawMatrix() = default;
  DrawMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool operator==(const DrawMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

struct DrawMeta {
  SamplerConfig config;
  PriorSpec prior;
};

struct PosteriorDraws {
  DrawMatrix<double> theta;
  std::vector<double> sigma2;
  DrawMeta meta;

  std::size_t draws() const noexcept { return theta.rows(); }
  std::size_t dimension() const noexcept { return theta.cols(); }
};

}  // namespace tfuse
