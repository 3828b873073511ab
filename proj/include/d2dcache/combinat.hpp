#pragma once

// Exact binomials and lexicographic enumeration/ranking of fixed-size user
// subsets. Both caching schemes index their groups and blocks through these.

#include <bit>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace d2dcache {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr int kMaxGroundSize = 64;

// C(n, k) in arbitrary precision; 0 when k < 0 or k > n.
inline BigInt binomial(long n, long k) {
  if (n < 0) throw ParameterError("binomial: n must be nonnegative");
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt acc = 1;
  // acc stays integral: after step i it equals C(n - k + i, i).
  for (long i = 1; i <= k; ++i) {
    acc *= n - k + i;
    acc /= i;
  }
  return acc;
}

// Checked 64-bit binomial for indexing. Throws CapacityError on overflow.
inline std::uint64_t binomial_u64(long n, long k) {
  BigInt v = binomial(n, k);
  if (v > std::numeric_limits<std::uint64_t>::max())
    throw CapacityError("binomial(" + std::to_string(n) + "," + std::to_string(k) +
                        ") exceeds 64 bits");
  return v.convert_to<std::uint64_t>();
}

// A set of 0-based user indices, stored as a bitmask over at most 64 users.
// Ordering is lexicographic on the ascending member sequence.
class UserSubset {
 public:
  UserSubset() = default;

  static UserSubset from_mask(std::uint64_t mask) {
    UserSubset s;
    s.mask_ = mask;
    return s;
  }

  // Members must be strictly increasing and in [0, 64).
  static UserSubset from_members(const std::vector<int>& members) {
    UserSubset s;
    int prev = -1;
    for (int m : members) {
      if (m <= prev || m >= kMaxGroundSize)
        throw ParameterError("UserSubset: members must be strictly increasing in [0,64)");
      s.mask_ |= std::uint64_t{1} << m;
      prev = m;
    }
    return s;
  }

  static UserSubset range(int begin, int end) {
    UserSubset s;
    for (int u = begin; u < end; ++u) s.mask_ |= std::uint64_t{1} << u;
    return s;
  }

  std::uint64_t mask() const { return mask_; }
  int size() const { return std::popcount(mask_); }
  bool empty() const { return mask_ == 0; }
  bool contains(int user) const {
    return user >= 0 && user < kMaxGroundSize && ((mask_ >> user) & 1u) != 0;
  }
  // Largest member + 1, or 0 if empty.
  int span() const { return mask_ == 0 ? 0 : kMaxGroundSize - std::countl_zero(mask_); }

  UserSubset without(int user) const { return from_mask(mask_ & ~(std::uint64_t{1} << user)); }
  UserSubset with(int user) const { return from_mask(mask_ | (std::uint64_t{1} << user)); }

  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (std::uint64_t m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }

  // j-th smallest member (0-based), or -1.
  int nth(int j) const {
    std::uint64_t m = mask_;
    for (; m != 0 && j > 0; --j) m &= m - 1;
    return m == 0 ? -1 : std::countr_zero(m);
  }

  // Number of members smaller than user.
  int position_of(int user) const {
    return std::popcount(mask_ & ((std::uint64_t{1} << user) - 1));
  }

  friend bool operator==(const UserSubset&, const UserSubset&) = default;

  friend std::strong_ordering operator<=>(const UserSubset& a, const UserSubset& b) {
    std::uint64_t x = a.mask_, y = b.mask_;
    while (x != 0 && y != 0) {
      int mx = std::countr_zero(x), my = std::countr_zero(y);
      if (mx != my) return mx <=> my;
      x &= x - 1;
      y &= y - 1;
    }
    // A proper prefix sorts first.
    return (x != 0) <=> (y != 0);
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (int m : members()) {
      if (!first) s += ",";
      s += std::to_string(m);
      first = false;
    }
    return s + "}";
  }

 private:
  std::uint64_t mask_ = 0;
};

namespace detail {

inline void check_sizes(int ground_size, int subset_size) {
  if (ground_size < 0 || ground_size > kMaxGroundSize)
    throw ParameterError("ground size must be in [0,64]");
  if (subset_size < 0 || subset_size > ground_size)
    throw ParameterError("subset size must be in [0, ground size]");
}

}  // namespace detail

// Calls fn(subset) for every size-k subset of [0, ground_size) in lexicographic order.
template <typename Fn>
void for_each_subset(int ground_size, int subset_size, Fn&& fn) {
  detail::check_sizes(ground_size, subset_size);
  std::vector<int> idx(static_cast<std::size_t>(subset_size));
  for (int i = 0; i < subset_size; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    std::uint64_t mask = 0;
    for (int v : idx) mask |= std::uint64_t{1} << v;
    fn(UserSubset::from_mask(mask));
    int i = subset_size - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == ground_size - subset_size + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < subset_size; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

inline std::vector<UserSubset> enumerate_subsets(int ground_size, int subset_size) {
  std::vector<UserSubset> out;
  detail::check_sizes(ground_size, subset_size);
  out.reserve(static_cast<std::size_t>(binomial_u64(ground_size, subset_size)));
  for_each_subset(ground_size, subset_size, [&](const UserSubset& s) { out.push_back(s); });
  return out;
}

// Lexicographic rank among all subsets of the same size.
inline std::uint64_t subset_rank(const UserSubset& s, int ground_size) {
  const int k = s.size();
  detail::check_sizes(ground_size, k);
  if (s.span() > ground_size) throw ParameterError("subset_rank: member outside ground set");
  std::uint64_t rank = 0;
  int prev = -1;
  int i = 0;
  for (int m : s.members()) {
    // Count subsets that agree on the first i members and take a smaller i-th one.
    for (int v = prev + 1; v < m; ++v) rank += binomial_u64(ground_size - v - 1, k - i - 1);
    prev = m;
    ++i;
  }
  return rank;
}

inline UserSubset subset_unrank(std::uint64_t rank, int ground_size, int subset_size) {
  detail::check_sizes(ground_size, subset_size);
  if (rank >= binomial_u64(ground_size, subset_size))
    throw ParameterError("subset_unrank: rank out of range");
  std::uint64_t mask = 0;
  int v = 0;
  for (int i = 0; i < subset_size; ++i) {
    while (true) {
      std::uint64_t block = binomial_u64(ground_size - v - 1, subset_size - i - 1);
      if (rank < block) break;
      rank -= block;
      ++v;
    }
    mask |= std::uint64_t{1} << v;
    ++v;
  }
  return UserSubset::from_mask(mask);
}

}  // namespace d2dcache
