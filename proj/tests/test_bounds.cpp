// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pooltest/bounds.hpp"

using namespace pooltest;

// Frozen from oracle::l_star_scan (exhaustive w = 2..10^4).
TEST(LStar, OracleValues) {
  auto half = l_star(Prior(0.5));
  EXPECT_NEAR(half.value, 2.0 * std::log(0.5), 1e-12);
  EXPECT_EQ(half.argmin, 2u);

  auto tenth = l_star(Prior(0.1));
  EXPECT_NEAR(tenth.value, -5.356763735776542, 1e-10);
  EXPECT_EQ(tenth.argmin, 6u);

  auto p3 = l_star(Prior(0.3));
  EXPECT_NEAR(p3.value, 2.0 * std::log(0.3), 1e-12);
  EXPECT_EQ(p3.argmin, 2u);
}

TEST(LStar, NeighbourhoodOfTenth) {
  const double q = 0.9;
  EXPECT_NEAR(weighted_test_term(q, 5), -5.337021807719583, 1e-10);
  EXPECT_NEAR(weighted_test_term(q, 6), -5.356763735776542, 1e-10);
  EXPECT_NEAR(weighted_test_term(q, 7), -5.30665275980898, 1e-10);
  EXPECT_NEAR(weighted_test_term(0.5, 3), 3.0 * std::log(0.75), 1e-12);
}

TEST(LStar, CertifiedScanMatchesExhaustiveOracle) {
  for (int k = 1; k < 200; ++k) {
    const double p = 0.005 * k;
    const auto got = l_star(Prior(p));
    const auto [want, arg] = oracle::l_star_scan(p);
    ASSERT_NEAR(got.value, want, 1e-10 * std::abs(want)) << "p=" << p;
    ASSERT_EQ(got.argmin, arg) << "p=" << p;
    ASSERT_LE(got.value, weighted_test_term(1.0 - p, got.scanned + 1));
  }
}

TEST(LStar, SmallPrevalenceAndCap) {
  const auto got = l_star(Prior(1e-3));
  const double q = 1.0 - 1e-3;
  // The true minimiser sits near ln2/p; check a window around it directly.
  for (std::size_t w = 2; w < 20'000; ++w) ASSERT_LE(got.value, weighted_test_term(q, w));
  EXPECT_THROW(l_star(Prior(1e-7)), std::runtime_error);
}

TEST(EpsilonBound, Examples) {
  EXPECT_NEAR(epsilon_bound(Prior(0.5)).epsilon, 0.125, 1e-12);
  EXPECT_NEAR(epsilon_bound(Prior(0.3)).epsilon, 0.027, 1e-12);
  EXPECT_NEAR(epsilon_bound(Prior(0.1)).epsilon, 0.1 * std::exp(-5.356763735776542), 1e-15);
  EXPECT_NEAR(epsilon_bound(Prior(0.1)).epsilon, 4.7161441256639676e-4, 1e-12);
}

TEST(EpsilonBound, RangeProperty) {
  for (int k = 1; k < 100; ++k) {
    const Prior prior(0.01 * k);
    const auto r = epsilon_bound(prior);
    ASSERT_GT(r.epsilon, 0.0);
    ASSERT_LE(r.epsilon, std::min(prior.p(), prior.q()));
    ASSERT_NEAR(r.epsilon, std::min(prior.p(), prior.q()) * std::exp(r.l_star), 1e-12 * r.epsilon);
  }
}

TEST(EpsilonBoundDelta, Examples) {
  const Prior half(0.5);
  EXPECT_NEAR(epsilon_bound_delta(half, 0.0), 0.125, 1e-12);
  EXPECT_NEAR(epsilon_bound_delta(half, 0.5), 0.25, 1e-12);
  EXPECT_NEAR(epsilon_bound_delta(Prior(0.2), 1.0 - 1e-12), 0.2, 1e-9);
  EXPECT_THROW(epsilon_bound_delta(half, 1.0), std::invalid_argument);
  EXPECT_THROW(epsilon_bound_delta(half, -0.1), std::invalid_argument);
}

TEST(EpsilonBoundDelta, NondecreasingInDelta) {
  for (double p : {0.05, 0.2, 0.5, 0.8}) {
    double last = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double e = epsilon_bound_delta(Prior(p), 0.01 * k);
      ASSERT_GE(e, last);
      last = e;
    }
  }
}

TEST(CountingBound, Examples) {
  EXPECT_NEAR(counting_bound(Prior(0.5), 100), 100.0, 1e-12);
  EXPECT_NEAR(counting_bound(Prior(0.5), 1), 1.0, 1e-12);
  EXPECT_NEAR(counting_bound(Prior(0.11), 1000), 499.915958164528, 1e-9);
  EXPECT_THROW(counting_bound(Prior(0.5), 0), std::invalid_argument);
}

TEST(DoublyRegularBound, Examples) {
  EXPECT_NEAR(doubly_regular_disguise_bound(Prior(0.5), 2, 3), 0.5625, 1e-15);
  EXPECT_EQ(doubly_regular_disguise_bound(Prior(0.4), 3, 1), 0.0);
  EXPECT_NEAR(doubly_regular_disguise_bound(Prior(0.3), 2, 4), 0.431649, 1e-12);
}

TEST(BoundReport, OptionalFields) {
  auto r = bound_report(Prior(0.5), 0.5, 10);
  ASSERT_TRUE(r.epsilon_delta && r.counting_bound);
  EXPECT_NEAR(*r.epsilon_delta, 0.25, 1e-12);
  EXPECT_NEAR(*r.counting_bound, 10.0, 1e-12);
  EXPECT_FALSE(bound_report(Prior(0.5)).delta);
}

TEST(FigureCurve, ShapeAndValues) {
  auto curve = figure_curve(0.05, 0.95, 19);
  ASSERT_EQ(curve.size(), 19u);
  bool saw_half = false;
  for (const auto& pt : curve) {
    EXPECT_GT(pt.epsilon, 0.0);
    if (pt.p <= 0.1 + 1e-12) {
      EXPECT_LT(pt.epsilon, 1e-3);
    }
    if (std::abs(pt.p - 0.5) < 1e-9) {
      saw_half = true;
      EXPECT_NEAR(pt.epsilon, 0.125, 1e-9);
    }
  }
  EXPECT_TRUE(saw_half);
  EXPECT_THROW(figure_curve(0.0, 0.5, 3), std::invalid_argument);
  EXPECT_EQ(figure_curve(0.2, 0.2, 1).size(), 1u);
}
