#include <gtest/gtest.h>

#include <set>

#include "d2dcache/combinat.hpp"

using namespace d2dcache;

namespace {

std::vector<int> members(const UserSubset& s) { return s.members(); }

// Counts k-subsets of [0,n) by brute force over bitmasks.
long brute_count(int n, int k) {
  long c = 0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m)
    if (std::popcount(m) == k) ++c;
  return c;
}

}  // namespace

TEST(Binomial, SmallValues) {
  EXPECT_EQ(binomial(4, 3), 4);
  EXPECT_EQ(binomial(5, 2), 10);
  EXPECT_EQ(binomial(3, 5), 0);
  EXPECT_EQ(binomial(3, -1), 0);
  EXPECT_EQ(binomial(0, 0), 1);
}

TEST(Binomial, NoOverflowAtHundred) {
  EXPECT_EQ(binomial(100, 50), BigInt("100891344545564193334812497256"));
  EXPECT_THROW(binomial_u64(100, 50), CapacityError);
  EXPECT_EQ(binomial_u64(30, 15), 155117520u);
}

TEST(Binomial, NegativeNThrows) { EXPECT_THROW(binomial(-1, 0), ParameterError); }

TEST(Binomial, MatchesEnumerationUpToTwelve) {
  for (int n = 0; n <= 12; ++n)
    for (int k = 0; k <= n; ++k) {
      EXPECT_EQ(binomial(n, k), brute_count(n, k)) << n << "," << k;
      EXPECT_EQ(enumerate_subsets(n, k).size(), binomial_u64(n, k));
    }
}

TEST(Subsets, EnumerationOrder) {
  auto s = enumerate_subsets(3, 2);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(members(s[0]), (std::vector<int>{0, 1}));
  EXPECT_EQ(members(s[1]), (std::vector<int>{0, 2}));
  EXPECT_EQ(members(s[2]), (std::vector<int>{1, 2}));

  auto all = enumerate_subsets(4, 4);
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(members(all[0]), (std::vector<int>{0, 1, 2, 3}));

  auto three = enumerate_subsets(4, 3);
  ASSERT_EQ(three.size(), 4u);
  EXPECT_EQ(members(three.front()), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(members(three.back()), (std::vector<int>{1, 2, 3}));
}

TEST(Subsets, EnumerationIsStrictlyLexicographic) {
  for (int n = 1; n <= 10; ++n)
    for (int k = 0; k <= n; ++k) {
      auto s = enumerate_subsets(n, k);
      for (std::size_t i = 1; i < s.size(); ++i) {
        EXPECT_TRUE(std::lexicographical_compare(s[i - 1].members().begin(), s[i - 1].members().end(),
                                                 s[i].members().begin(), s[i].members().end()));
        EXPECT_LT(s[i - 1], s[i]);
      }
    }
}

TEST(Subsets, InvalidSizes) {
  EXPECT_THROW(enumerate_subsets(3, 4), ParameterError);
  EXPECT_THROW(enumerate_subsets(3, -1), ParameterError);
  EXPECT_THROW(enumerate_subsets(-1, 0), ParameterError);
}

TEST(Subsets, EmptySubset) {
  auto s = enumerate_subsets(5, 0);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_TRUE(s[0].empty());
}

TEST(Rank, Examples) {
  EXPECT_EQ(subset_rank(UserSubset::from_members({0, 1, 2}), 4), 0u);
  EXPECT_EQ(members(subset_unrank(3, 4, 3)), (std::vector<int>{1, 2, 3}));
  EXPECT_THROW(subset_unrank(4, 4, 3), ParameterError);
  EXPECT_THROW(subset_rank(UserSubset::from_members({0, 5}), 4), ParameterError);
}

TEST(Rank, RoundTripPairsOfSix) {
  for (std::uint64_t r = 0; r < 15; ++r) EXPECT_EQ(subset_rank(subset_unrank(r, 6, 2), 6), r);
}

TEST(Rank, BijectionUpToTwelve) {
  for (int n = 0; n <= 12; ++n)
    for (int k = 0; k <= n; ++k) {
      auto all = enumerate_subsets(n, k);
      for (std::size_t r = 0; r < all.size(); ++r) {
        ASSERT_EQ(subset_rank(all[r], n), r);
        ASSERT_EQ(subset_unrank(r, n, k), all[r]);
      }
    }
}

TEST(UserSubset, Accessors) {
  auto s = UserSubset::from_members({1, 4, 6});
  EXPECT_EQ(s.size(), 3);
  EXPECT_TRUE(s.contains(4));
  EXPECT_FALSE(s.contains(5));
  EXPECT_EQ(s.nth(0), 1);
  EXPECT_EQ(s.nth(2), 6);
  EXPECT_EQ(s.position_of(4), 1);
  EXPECT_EQ(s.span(), 7);
  EXPECT_EQ(members(s.without(4)), (std::vector<int>{1, 6}));
  EXPECT_EQ(members(s.with(0)), (std::vector<int>{0, 1, 4, 6}));
  EXPECT_EQ(members(UserSubset::range(2, 5)), (std::vector<int>{2, 3, 4}));
}

TEST(UserSubset, RejectsNonCanonicalMembers) {
  EXPECT_THROW(UserSubset::from_members({2, 1}), ParameterError);
  EXPECT_THROW(UserSubset::from_members({1, 1}), ParameterError);
  EXPECT_THROW(UserSubset::from_members({-1}), ParameterError);
  EXPECT_THROW(UserSubset::from_members({64}), ParameterError);
}
