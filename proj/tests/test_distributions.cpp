#include <gtest/gtest.h>

#include "mlexp/distributions.hpp"
#include "reference_fixtures.hpp"

using namespace mlexp;

TEST(Distributions, NormalCdfMatchesReference) {
  for (const auto& c : ref::normal_cdf) EXPECT_NEAR(dist::normal_cdf(c.x), c.value, 1e-8) << c.x;
}

TEST(Distributions, NormalQuantileMatchesReference) {
  for (const auto& c : ref::normal_quantile) {
    EXPECT_NEAR(dist::normal_quantile(c.x), c.value, 1e-8 * std::max(1.0, std::abs(c.value))) << c.x;
  }
}

TEST(Distributions, StudentTMatchesReference) {
  for (const auto& c : ref::t_cdf) EXPECT_NEAR(dist::t_cdf(c.x, c.a), c.value, 1e-8) << c.x << " df " << c.a;
}

TEST(Distributions, ChiSquareMatchesReference) {
  for (const auto& c : ref::chi2_cdf) {
    EXPECT_NEAR(dist::chi2_cdf(c.x, c.a), c.value, 1e-8) << c.x << " df " << c.a;
    EXPECT_NEAR(dist::chi2_sf(c.x, c.a), 1.0 - c.value, 1e-8);
  }
}

TEST(Distributions, FMatchesReference) {
  for (const auto& c : ref::f_cdf) {
    EXPECT_NEAR(dist::f_cdf(c.x, c.a, c.b), c.value, 1e-8) << c.x;
    EXPECT_NEAR(dist::f_sf(c.x, c.a, c.b), 1.0 - c.value, 1e-8);
  }
}

TEST(Distributions, IncompleteFunctionsMatchReference) {
  for (const auto& c : ref::gamma_p) {
    EXPECT_NEAR(dist::gamma_p(c.x, c.a), c.value, 1e-10) << c.x << "," << c.a;
    EXPECT_NEAR(dist::gamma_q(c.x, c.a), 1.0 - c.value, 1e-10);
  }
  for (const auto& c : ref::beta_inc) EXPECT_NEAR(dist::beta_inc(c.x, c.a, c.b), c.value, 1e-10) << c.x;
}

TEST(Distributions, TwoSidedT) {
  EXPECT_NEAR(dist::t_two_sided(4.242640687119285, 4), 0.013236, 1e-5);
  EXPECT_DOUBLE_EQ(dist::t_two_sided(0.0, 7), 1.0);
}

TEST(Distributions, SymmetryAndLimits) {
  EXPECT_DOUBLE_EQ(dist::normal_cdf(0.0), 0.5);
  EXPECT_NEAR(dist::normal_cdf(1.3) + dist::normal_cdf(-1.3), 1.0, 1e-15);
  EXPECT_NEAR(dist::t_cdf(0.7, 3) + dist::t_cdf(-0.7, 3), 1.0, 1e-14);
  EXPECT_EQ(dist::chi2_cdf(0.0, 3), 0.0);
  EXPECT_EQ(dist::f_cdf(0.0, 2, 3), 0.0);
}
