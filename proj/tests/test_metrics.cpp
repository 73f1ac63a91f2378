#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <vector>

#include "tfuse/tfuse.hpp"

using namespace tfuse;

namespace {

Adjacency random_adjacency(std::size_t n, RngStream& rng) {
  Adjacency a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.set(i, i, true);
    for (std::size_t j = i + 1; j < n; ++j) a.set(i, j, rng.uniform() < 0.5);
  }
  return a;
}

}  // namespace

TEST(Adjacency, TrueAdjacencyExamples) {
  const Adjacency ones = adjacency_true(std::vector<double>{1, 1, 1});
  const Adjacency eye = adjacency_true(std::vector<double>{0, 2, 4});
  const Adjacency mixed = adjacency_true(std::vector<double>{1, 1, 2});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_TRUE(ones(i, j));
      EXPECT_EQ(eye(i, j), i == j);
    }
  EXPECT_TRUE(mixed(0, 1));
  EXPECT_FALSE(mixed(0, 2));
  EXPECT_FALSE(mixed(1, 2));
  EXPECT_TRUE(mixed(2, 2));
}

TEST(Adjacency, BayesThresholds) {
  const boost::math::students_t_distribution<> t4(4.0);
  const double expected_t = 0.05 * boost::math::quantile(t4, 0.995);
  EXPECT_NEAR(bayes_threshold(THyper{}, 100), expected_t, 1e-10);
  EXPECT_NEAR(bayes_threshold(THyper{}, 100), 0.230, 1e-3);
  EXPECT_NEAR(bayes_threshold(FixedRankHyper{}, 100), expected_t, 1e-10);
  const LaplaceHyper l = LaplaceHyper::for_size(100);
  EXPECT_NEAR(l.lambda, 3.035, 1e-3);
  EXPECT_NEAR(bayes_threshold(l, 100), 1.517, 1e-3);
  EXPECT_THROW(bayes_threshold(DPHyper{}, 100), ConfigError);
}

TEST(Adjacency, ThresholdLimits) {
  const std::vector<double> theta{0.0, 0.1, 0.1, 5.0};
  EXPECT_EQ(adjacency_threshold(theta, 1.0, 0.0), adjacency_true(theta));
  const Adjacency all = adjacency_threshold(theta, 1.0, INFINITY);
  EXPECT_EQ(all, adjacency_true(std::vector<double>(4, 0.0)));
  EXPECT_EQ(adjacency_bayes(std::vector<double>(5, 2.0), 0.3, THyper{}, 5),
            adjacency_true(std::vector<double>(5, 0.0)));
  EXPECT_THROW(adjacency_threshold(theta, 0.0, 1.0), DomainError);
}

TEST(RStatistic, Examples) {
  const Adjacency a = adjacency_true(std::vector<double>{1, 1, 2});
  EXPECT_EQ(r_statistic(a, a), 0.0);
  EXPECT_EQ(r_statistic(a, adjacency_true(std::vector<double>{1, 1, 1})), 4.0);
  EXPECT_EQ(r_statistic(adjacency_true(std::vector<double>{1, 1, 1}), adjacency_true(std::vector<double>{0, 1, 2})),
            6.0);
  EXPECT_THROW(r_statistic(a, Adjacency(4)), DimensionError);
}

TEST(RStatistic, IsAMetricOnRandomTriples) {
  RngStream rng(3);
  for (int k = 0; k < 200; ++k) {
    const Adjacency a = random_adjacency(7, rng), b = random_adjacency(7, rng), c = random_adjacency(7, rng);
    EXPECT_EQ(r_statistic(a, b), r_statistic(b, a));
    EXPECT_EQ(r_statistic(a, b) == 0.0, a == b);
    EXPECT_LE(r_statistic(a, c), r_statistic(a, b) + r_statistic(b, c));
  }
}

TEST(BlockStatistics, HandComputedExample) {
  const Adjacency truth = adjacency_true(std::vector<double>{0, 0, 1});
  const std::vector<double> est{1.0, 1.2, 3.0};
  EXPECT_NEAR(w_statistic(est, truth), 0.2, 1e-12);
  EXPECT_NEAR(b_statistic(est, truth), 1.8, 1e-12);
}

TEST(BlockStatistics, ExactRecovery) {
  const std::vector<double> star{0, 0, 2, 2, 2, 4.5};
  const Adjacency truth = adjacency_true(star);
  EXPECT_EQ(w_statistic(star, truth), 0.0);
  EXPECT_EQ(b_statistic(star, truth), 2.0);
}

TEST(BlockStatistics, BTildeIsLowerOrderStatistic) {
  // Two blocks of sizes 4 and 5 give 20 between pairs; q = 0.1 picks the second smallest.
  std::vector<double> star{0, 0, 0, 0, 1, 1, 1, 1, 1};
  std::vector<double> est{0.0, 0.1, 0.2, 0.3, 1.0, 1.5, 2.0, 2.5, 3.0};
  const Adjacency truth = adjacency_true(star);
  std::vector<double> gaps;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 4; j < 9; ++j) gaps.push_back(std::abs(est[i] - est[j]));
  std::sort(gaps.begin(), gaps.end());
  ASSERT_EQ(gaps.size(), 20u);
  EXPECT_EQ(b_tilde_statistic(est, truth, 0.10), gaps[1]);
  EXPECT_EQ(b_tilde_statistic(est, truth, 1.0), gaps.back());
  EXPECT_THROW(b_tilde_statistic(est, truth, 0.0), DomainError);
}

TEST(BlockStatistics, UndefinedPairSets) {
  const std::vector<double> est{1.0, 2.0, 3.0};
  EXPECT_THROW(w_statistic(est, adjacency_true(std::vector<double>{0, 1, 2})), UndefinedStatistic);
  EXPECT_THROW(b_statistic(est, adjacency_true(std::vector<double>{1, 1, 1})), UndefinedStatistic);
  EXPECT_THROW(b_tilde_statistic(est, adjacency_true(std::vector<double>{1, 1, 1})), UndefinedStatistic);
}

TEST(SelectionSet, Examples) {
  EXPECT_EQ(selection_set(std::vector<double>{0, 0, 1}, 1.0, 0.1), (std::vector<std::size_t>{2}));
  EXPECT_TRUE(selection_set(std::vector<double>(6, 2.0), 1.0, 0.1).empty());
  EXPECT_EQ(selection_set(std::vector<double>{0.1, 0.3, -0.2, 0.5}, 1.0, 1e-300),
            (std::vector<std::size_t>{1, 2, 3}));
  const SelectionConfig cfg = SelectionConfig::for_size(100);
  EXPECT_NEAR(cfg.threshold(), std::sqrt(std::log(100.0) / 100.0) / 100.0, 1e-15);
  EXPECT_THROW(selection_set(std::vector<double>{0, 1}, 0.0, 0.1), DomainError);
}

TEST(SelectionSet, FusedLassoBoundariesAreTheJumpSet) {
  RngStream rng(4);
  std::vector<double> y(80);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (i / 20) * 1.5 + 0.4 * sample_standard_normal(rng);
  const FusedLassoFit fit = fused_lasso_1d(y, 2.0);
  EXPECT_EQ(selection_set(fit.theta_hat, 1.0, std::numeric_limits<double>::denorm_min()), fit.block_boundaries);
}

TEST(Errors, PointAndPosteriorExamples) {
  const std::vector<double> star{1, 2, 3, 4};
  const PointErrors zero = point_errors(star, star);
  EXPECT_EQ(zero.l2, 0.0);
  EXPECT_EQ(zero.l1, 0.0);
  const PointErrors shift = point_errors(std::vector<double>{2, 3, 4, 5}, star);
  EXPECT_DOUBLE_EQ(shift.l2, 2.0);
  EXPECT_DOUBLE_EQ(shift.l1, 4.0);

  DrawMatrix<double> draws(2, 4);
  for (std::size_t c = 0; c < 4; ++c) draws(0, c) = draws(1, c) = star[c];
  draws(1, 0) += 2.0;
  const PosteriorErrors pe = posterior_errors(draws, star);
  EXPECT_DOUBLE_EQ(pe.post_mean_sq_l2, 2.0);
  EXPECT_DOUBLE_EQ(pe.l2, 1.0);
  EXPECT_THROW(point_errors(star, std::vector<double>{1}), DimensionError);
}

TEST(Errors, PosteriorMeanSquaredDominatesSquaredError) {
  RngStream rng(8);
  for (int k = 0; k < 50; ++k) {
    DrawMatrix<double> draws(30, 6);
    std::vector<double> star(6);
    for (double& v : star) v = sample_standard_normal(rng);
    for (std::size_t r = 0; r < 30; ++r)
      for (std::size_t c = 0; c < 6; ++c) draws(r, c) = sample_normal(0.5, 1.0, rng);
    const PosteriorErrors pe = posterior_errors(draws, star);
    EXPECT_GE(pe.post_mean_sq_l2 + 1e-12, pe.l2 * pe.l2);
  }
}

TEST(PosteriorSigma, IsMeanOfSquareRoots) {
  EXPECT_DOUBLE_EQ(posterior_sigma(std::vector<double>{1.0, 4.0}), 1.5);
  EXPECT_THROW(posterior_sigma(std::vector<double>{}), UndefinedStatistic);
}

TEST(Summary, SingleDrawAndShape) {
  DrawMatrix<double> one(1, 3);
  one(0, 0) = 1.0;
  one(0, 1) = -2.0;
  one(0, 2) = 0.5;
  const PosteriorSummary s = summarize_columns(one, default_summary_quantiles());
  ASSERT_EQ(s.rows.size(), 3u);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(s.rows[c].mean, one(0, c));
    for (double q : s.rows[c].quantiles) EXPECT_EQ(q, one(0, c));
  }
  EXPECT_THROW(summarize_columns(DrawMatrix<double>(0, 3), default_summary_quantiles()), UndefinedStatistic);
}

TEST(Summary, SymmetricDrawsHaveMedianNearZero) {
  RngStream rng(2);
  DrawMatrix<double> d(20001, 2);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    d(r, 0) = sample_standard_normal(rng);
    d(r, 1) = -d(r, 0);
  }
  const PosteriorSummary s = summarize_columns(d, default_summary_quantiles());
  EXPECT_NEAR(s.rows[0].quantiles[2], 0.0, 0.03);
  EXPECT_NEAR(s.rows[0].quantiles[2], -s.rows[1].quantiles[2], 1e-12);
  EXPECT_NEAR(s.rows[0].quantiles[4], 1.96, 0.05);
}

TEST(Summary, Type7Interpolation) {
  const std::vector<double> sorted{1.0, 2.0, 4.0, 8.0};
  EXPECT_DOUBLE_EQ(sorted_quantile(sorted, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(sorted_quantile(sorted, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(sorted_quantile(sorted, 1.0), 8.0);
}
