#include <gtest/gtest.h>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/inverse_gaussian.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "support/oracles.hpp"
#include "tfuse/distributions.hpp"

using namespace tfuse;

namespace {

constexpr std::size_t kDraws = 100000;
constexpr double kAlpha = 0.001;

template <typename Draw, typename Dist>
double ks_against(Draw draw, const Dist& dist, std::uint64_t stream) {
  RngStream rng(20261014, stream);
  std::vector<double> x(kDraws);
  for (double& v : x) v = draw(rng);
  return oracle::ks_statistic(std::move(x), [&](double v) { return boost::math::cdf(dist, v); });
}

struct TwoParam {
  double a;
  double b;
};

}  // namespace

TEST(Rng, SameSeedAndStreamReproduce) {
  RngStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a(), vb = b(), vc = c(), vd = d();
    EXPECT_EQ(va, vb);
    differs_c |= va != vc;
    differs_d |= va != vd;
  }
  EXPECT_TRUE(differs_c);
  EXPECT_TRUE(differs_d);
}

TEST(Rng, UniformIsInsideOpenInterval) {
  RngStream rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, DerivedStreamIdsAreDistinct) {
  std::set<std::uint64_t> ids;
  for (const char* tag : {"data", "t-fusion", "laplace-fusion", "dp"})
    for (std::uint64_t k = 0; k < 1000; ++k) ids.insert(derive_stream_id(tag, k));
  EXPECT_EQ(ids.size(), 4000u);
  EXPECT_EQ(derive_stream_id("data", 5), derive_stream_id("data", 5));
}

TEST(KolmogorovSmirnov, CriticalValueMatchesTable) {
  // Asymptotic 0.1% point of the Kolmogorov distribution is 1.9495.
  EXPECT_NEAR(oracle::ks_critical(1000000, kAlpha) * 1000.12, 1.9495, 1e-3);
}

TEST(NormalSampler, KolmogorovSmirnov) {
  const std::vector<TwoParam> settings{{0, 1}, {-3, 0.1}, {5, 2}, {0, 1e-3}, {100, 30}};
  std::uint64_t stream = 0;
  for (const auto& s : settings) {
    const double d = ks_against([&](RngStream& r) { return sample_normal(s.a, s.b, r); },
                                boost::math::normal_distribution<>(s.a, s.b), stream++);
    EXPECT_LT(d, oracle::ks_critical(kDraws, kAlpha)) << "mean " << s.a << " sd " << s.b;
  }
}

TEST(GammaSampler, KolmogorovSmirnov) {
  const std::vector<TwoParam> settings{{0.5, 0.5}, {0.05, 1.0}, {1.0, 3.0}, {2.5, 0.2}, {40.0, 7.0}};
  std::uint64_t stream = 100;
  for (const auto& s : settings) {
    const double d = ks_against([&](RngStream& r) { return sample_gamma(s.a, s.b, r); },
                                boost::math::gamma_distribution<>(s.a, 1.0 / s.b), stream++);
    EXPECT_LT(d, oracle::ks_critical(kDraws, kAlpha)) << "shape " << s.a << " rate " << s.b;
  }
}

TEST(InverseGammaSampler, KolmogorovSmirnov) {
  const std::vector<TwoParam> settings{{0.5, 0.5}, {2.0, 0.005}, {2.5, 1.0}, {0.2, 3.0}, {60.0, 2.0}};
  std::uint64_t stream = 200;
  for (const auto& s : settings) {
    const double d = ks_against([&](RngStream& r) { return sample_inverse_gamma(s.a, s.b, r); },
                                boost::math::inverse_gamma_distribution<>(s.a, s.b), stream++);
    EXPECT_LT(d, oracle::ks_critical(kDraws, kAlpha)) << "shape " << s.a << " rate " << s.b;
  }
}

TEST(InverseGammaSampler, EmpiricalCdfAtOneMatchesGammaIdentity) {
  // P(X <= 1) = P(1/X >= 1) with 1/X ~ Gamma(0.5, rate 0.5).
  RngStream rng(42);
  std::size_t below = 0;
  for (std::size_t k = 0; k < kDraws; ++k) below += sample_inverse_gamma(0.5, 0.5, rng) <= 1.0;
  const double expected = boost::math::cdf(boost::math::complement(boost::math::gamma_distribution<>(0.5, 2.0), 1.0));
  EXPECT_NEAR(static_cast<double>(below) / kDraws, expected, 0.01);
}

TEST(InverseGaussianSampler, KolmogorovSmirnov) {
  const std::vector<TwoParam> settings{{1.0, 1.0}, {0.2, 5.0}, {3.0, 0.5}, {50.0, 2.0}, {1e3, 1e-2}};
  std::uint64_t stream = 300;
  for (const auto& s : settings) {
    const double d = ks_against([&](RngStream& r) { return sample_inverse_gaussian(s.a, s.b, r); },
                                boost::math::inverse_gaussian_distribution<>(s.a, s.b), stream++);
    EXPECT_LT(d, oracle::ks_critical(kDraws, kAlpha)) << "mean " << s.a << " shape " << s.b;
  }
}

TEST(InverseGaussianSampler, HugeMeanOverShapeStaysPositiveAndFinite) {
  RngStream rng(5);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double v = sample_inverse_gaussian(1e12, 1e-6, rng);
    ASSERT_GT(v, 0.0);
    ASSERT_TRUE(std::isfinite(v));
    sum += v;
  }
  EXPECT_GT(sum, 0.0);
}

TEST(Samplers, MomentsMatch) {
  RngStream rng(11);
  const std::size_t n = 200000;
  double g = 0.0, ig = 0.0, inv = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    g += sample_gamma(3.0, 2.0, rng);
    ig += sample_inverse_gamma(6.0, 5.0, rng);
    inv += sample_inverse_gaussian(2.0, 3.0, rng);
  }
  EXPECT_NEAR(g / n, 1.5, 0.01);    // shape / rate, sd/sqrt(n) ~ 0.002
  EXPECT_NEAR(ig / n, 1.0, 0.01);   // rate / (shape - 1), sd ~ 0.5
  EXPECT_NEAR(inv / n, 2.0, 0.02);  // mean, sd sqrt(8/3)
}

TEST(Samplers, RejectInvalidParameters) {
  RngStream rng(1);
  EXPECT_THROW(sample_gamma(0.0, 1.0, rng), DomainError);
  EXPECT_THROW(sample_gamma(1.0, -1.0, rng), DomainError);
  EXPECT_THROW(sample_inverse_gamma(1.0, 0.0, rng), DomainError);
  EXPECT_THROW(sample_inverse_gamma(NAN, 1.0, rng), DomainError);
  EXPECT_THROW(sample_inverse_gaussian(0.0, 1.0, rng), DomainError);
  EXPECT_THROW(sample_inverse_gaussian(1.0, INFINITY, rng), DomainError);
}

TEST(SpecialFunctions, AgreeWithBoost) {
  for (double a : {0.05, 0.5, 1.0, 2.5, 10.0, 80.0})
    for (double x : {1e-4, 0.1, 1.0, 3.0, 20.0, 150.0}) {
      EXPECT_NEAR(special::gamma_p(a, x), boost::math::gamma_p(a, x), 1e-12) << a << " " << x;
      const double q = boost::math::gamma_q(a, x);
      EXPECT_NEAR(special::gamma_q(a, x), q, 1e-12 + 1e-10 * q) << a << " " << x;
    }
  for (double a : {0.5, 1.0, 2.0, 7.5})
    for (double b : {0.5, 3.0, 40.0})
      for (double x : {0.001, 0.2, 0.5, 0.9, 0.999})
        EXPECT_NEAR(special::beta_inc(a, b, x), boost::math::ibeta(a, b, x), 1e-12);
  const boost::math::normal_distribution<> z;
  for (double p : {1e-300, 1e-20, 1e-5, 0.02, 0.3, 0.5, 0.7, 0.975, 1.0 - 1e-12}) {
    const double ref = boost::math::quantile(z, p);
    EXPECT_NEAR(special::normal_quantile(p), ref, 1e-13 * (1.0 + std::abs(ref)));
  }
  // Phi(-40) underflows double, so the reference is taken in long double.
  const boost::math::normal_distribution<long double> zl;
  for (double x : {-5.0, -29.0, -31.0, -40.0, -100.0})
    EXPECT_NEAR(special::log_normal_cdf(x), static_cast<double>(std::log(boost::math::cdf(zl, static_cast<long double>(x)))),
                1e-11 * x * x)
        << x;
}

TEST(DistributionCdfs, AgreeWithBoost) {
  for (double mean : {0.5, 2.0, 30.0})
    for (double shape : {0.1, 1.0, 400.0})
      for (double x : {0.01, 0.5, 2.0, 40.0}) {
        // long double keeps exp(2 shape / mean) finite in the reference.
        const auto ref = static_cast<double>(boost::math::cdf(
            boost::math::inverse_gaussian_distribution<long double>(mean, shape), static_cast<long double>(x)));
        EXPECT_NEAR(inverse_gaussian_cdf(x, mean, shape), ref, 1e-10) << mean << " " << shape << " " << x;
      }
  for (double shape : {0.5, 2.0, 9.0})
    for (double x : {0.001, 0.3, 1.0, 7.0})
      EXPECT_NEAR(inverse_gamma_cdf(x, shape, 0.7),
                  boost::math::cdf(boost::math::inverse_gamma_distribution<>(shape, 0.7), x), 1e-12);
  for (double df : {0.7, 1.0, 4.0, 30.0})
    for (double x : {-50.0, -2.0, -0.1, 0.0, 0.3, 4.6, 1e3}) {
      const boost::math::students_t_distribution<> t(df);
      EXPECT_NEAR(student_t_cdf(df, x), boost::math::cdf(t, x), 1e-12) << df << " " << x;
    }
}

TEST(StudentTQuantile, AgreesWithBoostAcrossTails) {
  for (double df : {0.5, 1.0, 4.0, 10.0, 200.0}) {
    const boost::math::students_t_distribution<> t(df);
    for (double p : {1e-10, 1e-4, 0.025, 0.3, 0.5, 0.8, 0.995, 1.0 - 1e-8}) {
      const double ref = boost::math::quantile(t, p);
      EXPECT_NEAR(student_t_quantile(df, p), ref, 1e-9 * (1.0 + std::abs(ref))) << df << " " << p;
    }
  }
}

TEST(StudentTQuantile, MatchesQuadratureOracle) {
  const double q = oracle::t_quantile_quadrature(4.0, 0.995);
  EXPECT_NEAR(q, 4.604, 1e-3);
  EXPECT_NEAR(student_t_quantile(4.0, 0.995), q, 1e-7);
  EXPECT_NEAR(student_t_quantile(4.0, 0.005), -q, 1e-7);
}

TEST(StudentTQuantile, RejectsOutOfRange) {
  EXPECT_THROW(student_t_quantile(4.0, 0.0), DomainError);
  EXPECT_THROW(student_t_quantile(4.0, 1.0), DomainError);
  EXPECT_THROW(student_t_quantile(-1.0, 0.5), DomainError);
}

TEST(ScaledT, FromMixingMapsRateConvention) {
  const ScaledT d = ScaledT::from_mixing(2.0, 0.005);
  EXPECT_DOUBLE_EQ(d.df, 4.0);
  EXPECT_NEAR(d.scale, 0.05, 1e-15);
  EXPECT_THROW(ScaledT(0.0, 1.0), DomainError);
  EXPECT_THROW(ScaledT(4.0, -1.0), DomainError);
}

TEST(ScaledT, DensityIntegratesToOne) {
  for (const auto& [df, scale] : std::vector<std::pair<double, double>>{{4.0, 1.0}, {4.0, 0.05}, {10.0, 3.0}}) {
    // Substitute x = scale tan(u) to integrate over the whole line.
    const std::size_t m = 200000;
    const double h = M_PI / static_cast<double>(m);
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double u = -M_PI / 2 + (static_cast<double>(k) + 0.5) * h;
      const double x = scale * std::tan(u);
      s += std::exp(scaled_t_log_density(x, ScaledT(df, scale))) * scale / (std::cos(u) * std::cos(u));
    }
    EXPECT_NEAR(s * h, 1.0, 1e-6) << df << " " << scale;
  }
}

TEST(ScaledT, StandardCaseMatchesT4Density) {
  EXPECT_NEAR(scaled_t_log_density(1.0, ScaledT(4.0, 1.0)), std::log(oracle::t_density(1.0, 4.0)), 1e-14);
}

TEST(TuneScale, HitsTheTailProbabilityAtThreshold) {
  for (std::size_t n : {10u, 100u, 990u, 5000u}) {
    const double df = 4.0;
    const TuneResult tr = solve_tune_scale(n, df);
    const double nd = static_cast<double>(n);
    const double thr = std::sqrt(std::log(nd) / nd);
    const boost::math::students_t_distribution<> t(df);
    EXPECT_NEAR(2.0 * boost::math::cdf(boost::math::complement(t, thr / tr.scale)), 1.0 / nd, 1e-10 / nd);
    EXPECT_NEAR(tr.b_t, 0.5 * df * tr.scale * tr.scale, 1e-16);
  }
  const TuneResult hundred = solve_tune_scale(100, 4.0);
  EXPECT_NEAR(hundred.scale, 0.0466, 1e-4);
  EXPECT_NEAR(hundred.b_t, 0.00434, 1e-5);
}

TEST(TuneScale, RejectsTinyN) {
  EXPECT_THROW(solve_tune_scale(2, 4.0), DomainError);
  EXPECT_THROW(solve_tune_scale(100, 0.0), DomainError);
}
