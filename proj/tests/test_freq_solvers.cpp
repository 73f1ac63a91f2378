#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "support/oracles.hpp"
#include "tfuse/tfuse.hpp"

using namespace tfuse;

TEST(FusedLasso, MatchesExhaustiveSearch) {
  RngStream rng(1234);
  const double lambdas[] = {0.1, 1.0, 10.0};
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 1 + inst % 8;
    std::vector<double> y(n);
    for (double& v : y) v = 3.0 * sample_standard_normal(rng) + (rng.uniform() < 0.5 ? 0.0 : 4.0);
    const double lambda = lambdas[inst % 3];
    const FusedLassoFit fit = fused_lasso_1d(y, lambda);
    const auto ref = oracle::brute_force_fused_lasso(y, lambda);
    EXPECT_NEAR(fused_lasso_objective(y, fit.theta_hat, lambda), ref.objective, 1e-9) << "instance " << inst;
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(fit.theta_hat[i], ref.theta[i], 1e-9) << "instance " << inst;
  }
}

TEST(FusedLasso, HandWorkedTwoBlockCase) {
  const std::vector<double> y{0.0, 0.0, 10.0, 10.0};
  const FusedLassoFit fit = fused_lasso_1d(y, 1.0);
  const std::vector<double> expected{0.5, 0.5, 9.5, 9.5};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(fit.theta_hat[i], expected[i], 1e-12);
  EXPECT_EQ(fit.block_boundaries, (std::vector<std::size_t>{2}));
}

TEST(FusedLasso, LimitsOfThePenalty) {
  const std::vector<double> y{1.0, -2.0, 3.5, 0.25, 7.0};
  EXPECT_EQ(fused_lasso_1d(y, 0.0).theta_hat, y);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 5.0;
  const FusedLassoFit big = fused_lasso_1d(y, 1e6);
  for (double v : big.theta_hat) EXPECT_NEAR(v, mean, 1e-9);
  EXPECT_TRUE(big.block_boundaries.empty());
  EXPECT_THROW(fused_lasso_1d(y, -1.0), DomainError);
}

TEST(FusedLasso, FusedCoordinatesAreExactlyEqual) {
  RngStream rng(3);
  std::vector<double> y(500);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (i < 250 ? 0.0 : 2.0) + 0.5 * sample_standard_normal(rng);
  const FusedLassoFit fit = fused_lasso_1d(y, 5.0);
  EXPECT_LT(fit.block_boundaries.size(), 20u);
  EXPECT_EQ(block_boundaries(fit.theta_hat), fit.block_boundaries);
  // Mean over the solution equals the data mean (the penalty is shift invariant).
  EXPECT_NEAR(std::accumulate(fit.theta_hat.begin(), fit.theta_hat.end(), 0.0),
              std::accumulate(y.begin(), y.end(), 0.0), 1e-8);
}

TEST(FusedLasso, TotalVariationShrinksWithLambda) {
  RngStream rng(9);
  std::vector<double> y(200);
  for (double& v : y) v = sample_standard_normal(rng);
  double previous = INFINITY;
  for (double lambda : log_grid(0.01, 50.0, 15)) {
    const double tv = total_variation(fused_lasso_1d(y, lambda).theta_hat);
    EXPECT_LE(tv, previous + 1e-9);
    previous = tv;
  }
}

TEST(LogGrid, EndpointsAndSpacing) {
  const auto g = log_grid(1e-2, 10.0, 30);
  ASSERT_EQ(g.size(), 30u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-2);
  EXPECT_DOUBLE_EQ(g.back(), 10.0);
  for (std::size_t i = 2; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-12);
  EXPECT_EQ(log_grid(2.0, 5.0, 1), std::vector<double>{2.0});
  EXPECT_THROW(log_grid(0.0, 1.0, 3), ConfigError);
  EXPECT_THROW(log_grid(1.0, 2.0, 0), ConfigError);
}

TEST(CrossValidation, PicksMinimumErrorSmallestOnTies) {
  RngStream rng(0);
  const std::vector<double> constant(20, 3.0);
  const auto grid = log_grid(0.1, 10.0, 5);
  EXPECT_EQ(cv_select_lambda(constant, grid, 5, rng), grid.front());

  std::vector<double> y(100);
  RngStream data(2);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (i < 50 ? 0.0 : 3.0) + 0.5 * sample_standard_normal(data);
  const auto g = log_grid(1e-2, 10.0, 30);
  const double chosen = cv_select_lambda(y, g, 5, rng);
  for (double lambda : g) EXPECT_LE(cv_error(y, chosen, 5), cv_error(y, lambda, 5));
}

TEST(CrossValidation, RejectsBadSetups) {
  RngStream rng(0);
  const std::vector<double> y(9, 1.0);
  EXPECT_THROW(cv_select_lambda(y, std::vector<double>{}, 2, rng), ConfigError);
  EXPECT_THROW(cv_select_lambda(y, std::vector<double>{1.0}, 1, rng), ConfigError);
  EXPECT_THROW(cv_select_lambda(y, std::vector<double>{1.0}, 5, rng), ConfigError);
  EXPECT_THROW(cv_select_lambda(std::vector<double>(10, 1.0), std::vector<double>{-1.0}, 5, rng), ConfigError);
}

TEST(SortedFusion, ReturnsValuesInOriginalOrder) {
  const std::vector<double> y{4.1, 0.2, 3.9, -0.1, 4.0, 0.0};
  const FusedLassoFit fit = sorted_fusion_fit(y, 0.5);
  // Two clusters in sorted order; the fit must be monotone in y.
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      if (y[i] < y[j]) EXPECT_LE(fit.theta_hat[i], fit.theta_hat[j]);
  EXPECT_NEAR(fit.theta_hat[0], fit.theta_hat[2], 1e-12);
  EXPECT_NEAR(fit.theta_hat[1], fit.theta_hat[3], 1e-12);
  EXPECT_GT(fit.theta_hat[0] - fit.theta_hat[1], 3.0);
}
