#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracle.hpp"
#include "paoi/distributions.hpp"
#include "paoi/errors.hpp"
#include "support.hpp"

using namespace paoi;

namespace {

class CatalogTest : public ::testing::TestWithParam<std::size_t> {
protected:
  ServiceDistribution dist() const { return support::catalog()[GetParam()]; }
  oracle::Law law() const { return oracle::catalog()[GetParam()]; }
};

TEST_P(CatalogTest, CdfAndSurvivalMatchHandWrittenForms) {
  const auto d = dist();
  const auto o = law();
  for (double x : support::thetas(d, 40)) {
    EXPECT_NEAR(cdf(d, x), o.cdf(x), 1e-13) << kind_name(d) << " x=" << x;
    EXPECT_NEAR(cdf(d, x) + survival(d, x), 1.0, 1e-14);
  }
  EXPECT_EQ(cdf(d, -1.0), 0.0);
}

TEST_P(CatalogTest, MeanMatches) {
  EXPECT_NEAR(mean(dist()).value(), law().mean, 1e-12 * law().mean);
}

TEST_P(CatalogTest, TruncatedMomentsMatchQuadrature) {
  const auto d = dist();
  const auto o = law();
  for (double t : support::thetas(d, 12)) {
    const double int_f = oracle::integrate(o.cdf, 0.0, t, o.jumps);
    EXPECT_NEAR(integrated_cdf(d, t), int_f, 1e-9) << kind_name(d) << " t=" << t;
    EXPECT_NEAR(integrated_survival(d, t), t - int_f, 1e-9);
    EXPECT_NEAR(truncated_first_moment(d, t), t * o.cdf(t) - int_f, 1e-9);
  }
}

TEST_P(CatalogTest, ConditionalResidualFromMean) {
  const auto d = dist();
  const auto o = law();
  for (double t : support::thetas(d, 10)) {
    const double s = 1.0 - o.cdf(t);
    if (s < 1e-6) continue;
    const double expected = (o.mean - (t - oracle::integrate(o.cdf, 0.0, t, o.jumps))) / s;
    EXPECT_NEAR(conditional_residual(d, t).value(), expected, 1e-7 * std::max(1.0, expected))
        << kind_name(d) << " t=" << t;
  }
}

TEST_P(CatalogTest, QuantileIsGeneralizedInverse) {
  const auto d = dist();
  for (double q : {0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.999}) {
    const double x = quantile(d, q);
    EXPECT_GE(cdf(d, x), q - 1e-10) << kind_name(d) << " q=" << q;
    EXPECT_LE(cdf(d, x * (1.0 - 1e-7) - 1e-12), q + 1e-10);
  }
  EXPECT_THROW(quantile(d, 0.0), std::invalid_argument);
  EXPECT_THROW(quantile(d, 1.0), std::invalid_argument);
}

TEST_P(CatalogTest, SampleMeanAgreesWithinFiveStandardErrors) {
  const auto d = dist();
  Rng rng(1234 + GetParam());
  const int n = 200'000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = sample(d, rng);
    ASSERT_GE(x, support_min(d));
    s += x;
    s2 += x * x;
  }
  const double m = s / n;
  const double se = std::sqrt(std::max(s2 / n - m * m, 0.0) / n);
  EXPECT_NEAR(m, mean(d).value(), 5 * se + 1e-12) << kind_name(d);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, CatalogTest, ::testing::Range<std::size_t>(0, 8));

TEST(Distributions, FactoriesRejectBadParameters) {
  EXPECT_THROW(ServiceDistribution::exponential(0.0), std::invalid_argument);
  EXPECT_THROW(ServiceDistribution::erlang(0, 1.0), std::invalid_argument);
  EXPECT_THROW(ServiceDistribution::pareto(1.0, -1.0), std::invalid_argument);
  EXPECT_THROW(ServiceDistribution::two_point(3.0, 1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(ServiceDistribution::two_point(1.0, 3.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ServiceDistribution::hyperexponential({1.0, 2.0}, {0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(ServiceDistribution::lognormal(0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(ServiceDistribution::deterministic(std::numeric_limits<double>::infinity()),
               std::invalid_argument);
}

TEST(Distributions, HeavyTailHasInfiniteMean) {
  for (double a : {0.5, 1.0}) {
    const auto d = ServiceDistribution::pareto(1.0, a);
    EXPECT_TRUE(mean(d).is_infinite());
    EXPECT_TRUE(conditional_residual(d, 2.0).is_infinite());
    EXPECT_TRUE(std::isfinite(truncated_first_moment(d, 50.0)));
  }
}

TEST(Distributions, ResidualOfExhaustedLawIsDegenerate) {
  const auto d = ServiceDistribution::deterministic(1.0);
  EXPECT_THROW(conditional_residual(d, 1.0), DegenerateCondition);
  EXPECT_DOUBLE_EQ(conditional_residual(d, 0.25).value(), 0.75);
}

TEST(Distributions, AtomsAtSupportMinimum) {
  EXPECT_DOUBLE_EQ(atom_at_support_min(ServiceDistribution::two_point(1, 3, 0.3)), 0.3);
  EXPECT_DOUBLE_EQ(atom_at_support_min(ServiceDistribution::deterministic(2)), 1.0);
  EXPECT_EQ(atom_at_support_min(ServiceDistribution::pareto(1, 2)), 0.0);
  EXPECT_EQ(atom_at_support_min(ServiceDistribution::exponential(1)), 0.0);
}

TEST(Distributions, ExponentialResidualIsMemoryless) {
  const auto d = ServiceDistribution::exponential(2.0);
  for (double t : {0.0, 0.3, 1.0, 5.0}) EXPECT_NEAR(conditional_residual(d, t).value(), 0.5, 1e-12);
}

TEST(Distributions, SamplingIsReproducible) {
  const auto d = ServiceDistribution::lognormal(0.2, 1.1);
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(d, a), sample(d, b));
}

TEST(Distributions, DescribeUsesConfigNames) {
  EXPECT_EQ(describe(ServiceDistribution::pareto(1, 3)), "pareto(xm=1,alpha=3)");
  EXPECT_EQ(kind_name(ServiceDistribution::shifted_exponential(1, 1)), "shifted_exponential");
}

}  // namespace
