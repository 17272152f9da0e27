// SPDX-License-Identifier: Apache-2.0
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pooltest/design.hpp"

using namespace pooltest;

namespace {

std::vector<std::size_t> column_weights(const TestDesign& d) {
  std::vector<std::size_t> out(d.items(), 0);
  for (std::size_t t = 0; t < d.tests(); ++t)
    for (std::size_t i = 0; i < d.items(); ++i) out[i] += d.contains(t, i) ? 1 : 0;
  return out;
}

}  // namespace

TEST(NewDesign, CountsWeights) {
  auto d = new_design({{0, 1}, {2}}, 3);
  EXPECT_EQ(d.tests(), 2u);
  EXPECT_EQ(d.items(), 3u);
  EXPECT_EQ(row_weights(d), (std::vector<std::size_t>{2, 1}));
}

TEST(NewDesign, EmptyAndRepeatedRows) {
  auto empty = new_design({}, 5);
  EXPECT_EQ(empty.tests(), 0u);
  EXPECT_EQ(empty.items(), 5u);

  auto repeated = new_design({{0}, {0}, {0}}, 1);
  EXPECT_EQ(row_weights(repeated), (std::vector<std::size_t>{1, 1, 1}));
}

TEST(NewDesign, RejectsBadInput) {
  EXPECT_THROW(new_design({{0, 3}}, 3), std::out_of_range);
  EXPECT_THROW(new_design({}, 0), std::invalid_argument);
}

TEST(RowWeights, Examples) {
  EXPECT_EQ(row_weights(gen_individual(4)), (std::vector<std::size_t>{1, 1, 1, 1}));
  EXPECT_EQ(row_weights(gen_bernoulli(3, 2, 1.0, 9)), (std::vector<std::size_t>{3, 3}));
  EXPECT_EQ(row_weights(new_design({{0, 1}, {}, {0, 1, 2}}, 3)), (std::vector<std::size_t>{2, 0, 3}));
}

TEST(GenIndividual, IsIdentity) {
  auto d = gen_individual(3);
  ASSERT_EQ(d.tests(), 3u);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(d.contains(t, i), t == i);
  EXPECT_EQ(gen_individual(1), new_design({{0}}, 1));
  EXPECT_THROW(gen_individual(0), std::invalid_argument);
}

TEST(GenBernoulli, DegenerateAndDeterministic) {
  auto zeros = gen_bernoulli(7, 4, 0.0, 1);
  for (auto w : zeros.weights()) EXPECT_EQ(w, 0u);
  auto ones = gen_bernoulli(7, 4, 1.0, 1);
  for (auto w : ones.weights()) EXPECT_EQ(w, 7u);

  EXPECT_EQ(gen_bernoulli(100, 50, 0.1, 42), gen_bernoulli(100, 50, 0.1, 42));
  EXPECT_NE(gen_bernoulli(100, 50, 0.1, 42), gen_bernoulli(100, 50, 0.1, 43));

  EXPECT_THROW(gen_bernoulli(5, 5, 1.5, 0), std::invalid_argument);
  EXPECT_THROW(gen_bernoulli(5, 5, -0.1, 0), std::invalid_argument);
}

TEST(GenBernoulli, DensityNearNu) {
  auto d = gen_bernoulli(200, 200, 0.1, 5);
  std::size_t ones = 0;
  for (auto w : d.weights()) ones += w;
  // 40000 draws; sd of the mean is 0.0015.
  EXPECT_NEAR(static_cast<double>(ones) / 40000.0, 0.1, 0.006);
}

TEST(GenDoublyRegular, Examples) {
  auto d = gen_doubly_regular(6, 2, 3, 11);
  EXPECT_EQ(d.tests(), 4u);
  for (auto w : d.weights()) EXPECT_EQ(w, 3u);
  for (auto c : column_weights(d)) EXPECT_EQ(c, 2u);

  auto single = gen_doubly_regular(4, 1, 4, 0);
  ASSERT_EQ(single.tests(), 1u);
  EXPECT_EQ(single.weight(0), 4u);

  EXPECT_THROW(gen_doubly_regular(5, 2, 3, 0), std::invalid_argument);
  EXPECT_THROW(gen_doubly_regular(4, 1, 5, 0), std::invalid_argument);
  EXPECT_THROW(gen_doubly_regular(4, 0, 2, 0), std::invalid_argument);
}

TEST(GenDoublyRegular, RetryBudgetExhaustion) {
  // Ten full tests over ten items: a random matching is simple with
  // probability about (10!/10^10)^9, so every retry is rejected.
  EXPECT_THROW(gen_doubly_regular(10, 10, 10, 0), construction_failed);
  EXPECT_NO_THROW(gen_doubly_regular(3, 2, 3, 0));
}

TEST(GenDoublyRegular, RegularityProperty) {
  std::mt19937_64 gen(17);
  const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> shapes = {
      {12, 2, 3}, {16, 2, 4}, {32, 2, 4}, {64, 2, 4}, {20, 3, 5}, {30, 1, 6}, {24, 3, 4}};
  for (const auto& [n, l, r] : shapes) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto d = gen_doubly_regular(n, l, r, seed);
      ASSERT_EQ(d.tests(), n * l / r);
      for (auto w : d.weights()) ASSERT_EQ(w, r);
      for (auto c : column_weights(d)) ASSERT_EQ(c, l);
      ASSERT_EQ(d, gen_doubly_regular(n, l, r, seed));
    }
  }
}

TEST(Reduce, HandTrace) {
  auto d = new_design({{}, {0}, {0, 1, 2}}, 3);
  auto [reduced, log] = reduce(d);
  EXPECT_EQ(reduced, new_design({{0, 1}}, 2));
  EXPECT_EQ(log.removed_empty_tests, (std::vector<std::size_t>{0}));
  ASSERT_EQ(log.resolved_items.size(), 1u);
  EXPECT_EQ(log.resolved_items[0], (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(log.item_map, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(log.test_map, (std::vector<std::size_t>{2}));
}

TEST(Reduce, IdentityVanishes) {
  auto [reduced, log] = reduce(gen_individual(3));
  EXPECT_EQ(reduced.tests(), 0u);
  EXPECT_EQ(reduced.items(), 0u);
  EXPECT_EQ(log.resolved_items.size(), 3u);
  EXPECT_TRUE(log.removed_empty_tests.empty());
}

TEST(Reduce, AlreadyReducedUnchanged) {
  auto d = new_design({{0, 1}, {1, 2}}, 3);
  auto [reduced, log] = reduce(d);
  EXPECT_EQ(reduced, d);
  EXPECT_TRUE(log.removed_empty_tests.empty());
  EXPECT_TRUE(log.resolved_items.empty());
  EXPECT_EQ(log.item_map, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Reduce, CascadeEmptiesTests) {
  // Removing item 0 via test 0 leaves test 1 empty.
  auto d = new_design({{0}, {0}, {1, 2}}, 3);
  auto [reduced, log] = reduce(d);
  EXPECT_EQ(log.resolved_items, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}));
  EXPECT_EQ(log.removed_empty_tests, (std::vector<std::size_t>{1}));
  EXPECT_EQ(reduced, new_design({{0, 1}}, 2));
}

TEST(Reduce, Properties) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + gen() % 10;
    const std::size_t T = gen() % (2 * n);
    auto d = oracle::random_design(gen, T, n, 0, 3);
    auto [reduced, log] = reduce(d);

    for (auto w : reduced.weights()) ASSERT_GE(w, 2u);
    ASSERT_EQ(reduce(reduced).design, reduced);

    // Each resolving test had weight one among the items still present then.
    Bits alive(n);
    alive.set();
    for (const auto& [item, test] : log.resolved_items) {
      ASSERT_EQ((d.row(test) & alive).count(), 1u);
      ASSERT_TRUE(d.contains(test, item));
      alive.reset(item);
    }
    ASSERT_EQ(log.item_map.size() + log.resolved_items.size(), n);
    ASSERT_EQ(log.test_map.size() + log.resolved_items.size() + log.removed_empty_tests.size(), T);

    // Rows of the reduced design are the original rows restricted to kept items.
    for (std::size_t t = 0; t < reduced.tests(); ++t)
      for (std::size_t j = 0; j < reduced.items(); ++j)
        ASSERT_EQ(reduced.contains(t, j), d.contains(log.test_map[t], log.item_map[j]));

    if (T < n) {
      ASSERT_GT(reduced.items(), 0u);
      ASSERT_LE(static_cast<double>(reduced.tests()) / static_cast<double>(reduced.items()),
                static_cast<double>(T) / static_cast<double>(n) + 1e-15);
    }
  }
}

TEST(LiftEstimate, CombinesBothParts) {
  auto d = new_design({{}, {0}, {0, 1, 2}}, 3);
  auto [reduced, log] = reduce(d);
  Bits reduced_est(2);
  reduced_est.set(1);  // reduced item 1 = original item 2
  Bits resolved(3);
  resolved.set(0);
  resolved.set(1);  // ignored: item 1 is not a resolved item
  auto lifted = lift_estimate(log, reduced_est, resolved);
  EXPECT_TRUE(lifted.test(0));
  EXPECT_FALSE(lifted.test(1));
  EXPECT_TRUE(lifted.test(2));
  EXPECT_THROW(lift_estimate(log, Bits(3), resolved), std::invalid_argument);
}

TEST(DesignText, ParsesCommentsAndRoundTrips) {
  const std::string text = "# a design\n3 4\n1100\n# mid comment\n0011\n0000";
  auto d = parse_design(text);
  EXPECT_EQ(d, new_design({{0, 1}, {2, 3}, {}}, 4));
  EXPECT_EQ(to_text(d), "3 4\n1100\n0011\n0000\n");
  EXPECT_EQ(parse_design(to_text(d)), d);

  std::mt19937_64 gen(3);
  for (int k = 0; k < 50; ++k) {
    auto r = oracle::random_design(gen, gen() % 8, 1 + gen() % 12, 0, 12);
    ASSERT_EQ(parse_design(to_text(r)), r);
  }
}

TEST(DesignText, EmptyDesign) {
  auto d = parse_design("0 5\n");
  EXPECT_EQ(d.tests(), 0u);
  EXPECT_EQ(d.items(), 5u);
}

TEST(DesignText, RejectsMalformed) {
  EXPECT_THROW(parse_design(""), parse_error);
  EXPECT_THROW(parse_design("2 3\n110\n"), parse_error);
  EXPECT_THROW(parse_design("1 3\n11\n"), parse_error);
  EXPECT_THROW(parse_design("1 3\n1x0\n"), parse_error);
  EXPECT_THROW(parse_design("1 0\n\n"), parse_error);
  EXPECT_THROW(parse_design("a b\n"), parse_error);
  EXPECT_THROW(parse_design("1 3 4\n111\n"), parse_error);
}
