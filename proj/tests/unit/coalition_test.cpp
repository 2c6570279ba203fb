#include <algorithm>
#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "gshap/coalition.hpp"
#include "gshap/errors.hpp"

namespace gshap {
namespace {

using Rational = ShapleyWeight::Rational;

std::vector<std::uint64_t> masks_of(const SubsetRange& r) {
  std::vector<std::uint64_t> out;
  for (Coalition c : r) out.push_back(c.members);
  return out;
}

TEST(Coalition, BasicSetOperations) {
  Coalition c = Coalition{}.with(0).with(3);
  EXPECT_EQ(c.size(), 2);
  EXPECT_TRUE(c.contains(3));
  EXPECT_FALSE(c.contains(1));
  EXPECT_EQ(c.without(3), Coalition::single(0));
  EXPECT_TRUE(c.is_subset_of(Coalition::grand(4)));
  EXPECT_EQ(c.indices(), (std::vector<int>{0, 3}));
  EXPECT_EQ(Coalition::grand(3).members, 0b111u);
  EXPECT_EQ(Coalition::empty().size(), 0);
}

TEST(EnumerateSubsets, SinglePlayer) {
  EXPECT_EQ(masks_of(enumerate_subsets(1, 0)), std::vector<std::uint64_t>{0});
}

TEST(EnumerateSubsets, ThreePlayersExcludingOne) {
  // {}, {0}, {2}, {0,2}
  EXPECT_EQ(masks_of(enumerate_subsets(3, 1)),
            (std::vector<std::uint64_t>{0b000, 0b001, 0b100, 0b101}));
}

TEST(EnumerateSubsets, TenPlayers) {
  const auto r = enumerate_subsets(10, 0);
  EXPECT_EQ(r.count(), 512u);
  EXPECT_EQ(masks_of(r).size(), 512u);
}

TEST(EnumerateSubsets, MatchesPowersetUpToTwelvePlayers) {
  for (int p = 1; p <= 12; ++p) {
    for (int j = 0; j < p; ++j) {
      auto got = masks_of(enumerate_subsets(p, j));
      std::sort(got.begin(), got.end());
      // Powerset of the other p-1 players built by inserting a zero bit at j.
      std::vector<std::uint64_t> want;
      for (std::uint64_t k = 0; k < (std::uint64_t{1} << (p - 1)); ++k) {
        const std::uint64_t low = k & ((std::uint64_t{1} << j) - 1);
        const std::uint64_t high = (k >> j) << (j + 1);
        want.push_back(low | high);
      }
      std::sort(want.begin(), want.end());
      ASSERT_EQ(got, want) << "P=" << p << " j=" << j;
    }
  }
}

TEST(EnumerateSubsets, RangeIsRestartable) {
  const auto r = enumerate_subsets(5, 2);
  EXPECT_EQ(masks_of(r), masks_of(r));
}

TEST(EnumerateSubsets, Errors) {
  EXPECT_THROW(enumerate_subsets(64, 0), CapacityError);
  EXPECT_THROW(enumerate_subsets(26, 0), CapacityError);
  EXPECT_NO_THROW(enumerate_subsets(26, 0, 30));
  EXPECT_THROW(enumerate_subsets(3, 3), DomainError);
  EXPECT_THROW(enumerate_subsets(0, 0), DomainError);
  try {
    enumerate_subsets(30, 0);
    FAIL();
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("groupShapley"), std::string::npos);
  }
}

TEST(ShapleyWeight, SmallCases) {
  EXPECT_EQ(shapley_weight(0, 1).exact(), Rational(1));
  EXPECT_EQ(shapley_weight(1, 3).exact(), Rational(1, 6));
  EXPECT_EQ(shapley_weight(0, 3).exact(), Rational(1, 3));
  EXPECT_THROW(shapley_weight(3, 3), DomainError);
  EXPECT_THROW(shapley_weight(-1, 3), DomainError);
}

TEST(ShapleyWeight, BruteForceSumFivePlayers) {
  Rational total = 0;
  for (Coalition s : enumerate_subsets(5, 2)) total += shapley_weight(s.size(), 5).exact();
  EXPECT_EQ(total, Rational(1));
}

TEST(ShapleyWeight, NormalizationUpToTwentyPlayers) {
  for (int p = 1; p <= 20; ++p) {
    Rational total = 0;
    Rational binom = 1;  // C(p-1, s)
    for (int s = 0; s < p; ++s) {
      const auto w = shapley_weight(s, p).exact();
      EXPECT_GT(w, 0);
      total += binom * w;
      binom = binom * (p - 1 - s) / (s + 1);
    }
    EXPECT_EQ(total, Rational(1)) << "P=" << p;
  }
}

TEST(ShapleyWeight, LargePlayerCountStaysPositive) {
  const auto w = shapley_weight(31, 63);
  EXPECT_GT(w.exact(), 0);
  EXPECT_GT(w.to_double(), 0.0);
}

TEST(ShapleyWeight, TableMatchesExact) {
  const auto t = shapley_weight_table(7);
  ASSERT_EQ(t.size(), 7u);
  for (int s = 0; s < 7; ++s) EXPECT_DOUBLE_EQ(t[s], shapley_weight(s, 7).to_double());
}

}  // namespace
}  // namespace gshap
