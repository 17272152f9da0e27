// SPDX-License-Identifier: Apache-2.0
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pooltest/model.hpp"

using namespace pooltest;

TEST(Prior, Invariants) {
  Prior prior(0.3);
  EXPECT_DOUBLE_EQ(prior.q(), 0.7);
  EXPECT_THROW(Prior(0.0), std::invalid_argument);
  EXPECT_THROW(Prior(1.0), std::invalid_argument);
  EXPECT_THROW(Prior(-0.2), std::invalid_argument);
  EXPECT_NEAR(prior.weight(1, 2), 0.21, 1e-15);
}

TEST(SampleDefectiveSet, Deterministic) {
  Prior prior(0.4);
  EXPECT_EQ(sample_defective_set(50, prior, 7), sample_defective_set(50, prior, 7));
  EXPECT_NE(sample_defective_set(50, prior, 7), sample_defective_set(50, prior, 8));
  EXPECT_THROW(sample_defective_set(0, prior, 7), std::invalid_argument);
}

TEST(SampleDefectiveSet, Concentration) {
  Prior prior(0.3);
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    sum += static_cast<double>(sample_defective_set(10'000, prior, seed).size()) / 10'000.0;
  EXPECT_NEAR(sum / 100.0, 0.3, 0.02);
}

TEST(Outcomes, Examples) {
  auto d = new_design({{0, 1}, {2}}, 3);
  EXPECT_EQ(outcomes(d, DefectiveSet::from_indices(3, {1})).to_string(), "10");
  EXPECT_EQ(outcomes(d, DefectiveSet(3)).to_string(), "00");

  auto e = new_design({{0, 1}, {1, 2}, {2}}, 3);
  EXPECT_EQ(outcomes(e, DefectiveSet::from_indices(3, {2})).to_string(), "011");

  EXPECT_EQ(outcomes(gen_individual(3), DefectiveSet::from_indices(3, {1})).to_string(), "010");
  EXPECT_THROW(outcomes(d, DefectiveSet(4)), std::invalid_argument);
}

TEST(Outcomes, MonotoneAndOrHomomorphic) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + gen() % 12;
    auto d = oracle::random_design(gen, gen() % 10, n, 0, n);
    const auto a = DefectiveSet::from_mask(n, gen());
    const auto b = DefectiveSet::from_mask(n, gen());
    DefectiveSet both(a.bits() | b.bits());
    DefectiveSet inter(a.bits() & b.bits());

    const auto ya = outcomes(d, a), yb = outcomes(d, b);
    ASSERT_EQ(outcomes(d, both).bits(), ya.bits() | yb.bits());
    ASSERT_TRUE(outcomes(d, inter).bits().is_subset_of(ya.bits()));
    for (std::size_t t = 0; t < d.tests(); ++t)
      if (d.weight(t) == 0) {
        ASSERT_FALSE(ya[t]);
      }
    ASSERT_EQ(oracle::test_outcomes(oracle::to_matrix(d), oracle::mask_to_set(std::uint64_t{0}, n)),
              std::vector<int>(d.tests(), 0));
  }
}

TEST(Serialization, SetsAndOutcomes) {
  EXPECT_EQ(DefectiveSet::from_indices(6, {4, 0, 2}).to_string(), "0,2,4");
  EXPECT_EQ(DefectiveSet(3).to_string(), "");
  EXPECT_EQ(OutcomeVector::parse("0110").to_string(), "0110");
  EXPECT_TRUE(OutcomeVector::parse("0110")[1]);
  EXPECT_THROW(OutcomeVector::parse("01a"), parse_error);
  EXPECT_THROW(DefectiveSet::from_indices(3, {3}), std::out_of_range);
}
