#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "d2dcache/analytics.hpp"

using namespace d2dcache;

namespace {

double C(int n, int k) { return binomial(n, k).convert_to<double>(); }

// Polynomial form of the code-rate condition, term by term.
double f_series(double r, int K, double M, int N) {
  double sum = 1.0;
  for (int i = 0; i <= K - 1; ++i) sum += C(K, i) * std::pow(-M / N, K - i) * std::pow(r, K - i - 1);
  return sum;
}

// Known symbols per unit I as a sum over subset sizes.
double known_series(int K, double M, int N, double r) {
  const double q = M * r / N;
  double sum = 0.0;
  for (int i = 1; i <= K; ++i) sum += C(K, i) * std::pow(q, i) * std::pow(1 - q, K - i);
  return sum / r;
}

// Random-scheme rate by walking every subset U of size >= 2 and charging
// t/(t-1) blocks (t >= 2 transmitters) or one block (t = 1) per U.
double rand_rate_by_subsets(int K, double M, int N, int S, double r) {
  const double q = M * r / N;
  double total = 0.0;
  for (int size = 2; size <= K; ++size)
    for_each_subset(K, size, [&](const UserSubset& U) {
      const int t = std::popcount(U.mask() & ~((std::uint64_t{1} << S) - 1));
      if (t == 0) return;
      const double blocks = t == 1 ? 1.0 : t / (t - 1.0);
      total += blocks * std::pow(q, size - 1) * std::pow(1 - q, K - size + 1);
    });
  return total / r;
}

// Deterministic rate by counting packets over (t+1)-subsets.
Rational det_rate_by_subsets(int K, int t, int S) {
  long long packets = 0;
  for_each_subset(K, t + 1, [&](const UserSubset& U) {
    const int i = std::popcount(U.mask() & ((std::uint64_t{1} << S) - 1));
    packets += t + 1 + (i == 0 ? 0 : (i + t - i - 1) / (t - i));
  });
  return Rational(packets, static_cast<long long>(binomial_u64(K, t)) * t);
}

double cutset_brute(int K, double M, int N) {
  double best = 0.0;
  for (int l = 1; l <= std::min(K, N); ++l) {
    const int share = static_cast<int>(std::floor(static_cast<double>(N) / l));
    if (share > 0) best = std::max(best, l - l * M / share);
  }
  return best;
}

}  // namespace

TEST(DetRate, Examples) {
  EXPECT_EQ(theorem1_rate(4, Rational(3), 4, 2), Rational(1, 2));
  EXPECT_EQ(theorem1_rate(4, Rational(3), 4, 0), Rational(1, 3));
  EXPECT_EQ(theorem1_rate(6, Rational(2), 6, 0), Rational(4, 2));
  EXPECT_EQ(theorem1_rate(8, Rational(2), 8, 0), Rational(6, 2));
  EXPECT_EQ(theorem1_rate(9, Rational(3), 9, 0), Rational(6, 3));
}

TEST(DetRate, Preconditions) {
  EXPECT_THROW(theorem1_rate(4, Rational(3), 4, 3), ToleranceExceededError);
  EXPECT_THROW(theorem1_rate(4, Rational(3), 4, -1), ToleranceExceededError);
  EXPECT_THROW(theorem1_rate(4, Rational(4), 4, 0), TrivialCachingError);
  EXPECT_THROW(theorem1_rate(4, Rational(1), 8, 0), UnsupportedParameterError);
}

TEST(DetRate, MatchesSubsetCount) {
  for (int K = 2; K <= 12; ++K)
    for (int t = 1; t < K; ++t)
      for (int S = 0; S <= t - 1; ++S)
        ASSERT_EQ(theorem1_rate(K, Rational(t), K, S), det_rate_by_subsets(K, t, S)) << K << " " << t << " " << S;
}

TEST(DetRate, LargeKExact) {
  // (K-t)/t with no selfish users, at a size where 64-bit binomials overflow.
  EXPECT_EQ(theorem1_rate(100, Rational(25), 50, 0), Rational(50, 50));
  const Rational r = theorem1_rate(100, Rational(25), 50, 20);
  EXPECT_GT(r, Rational(1));
  EXPECT_LT(r, Rational(2));
}

TEST(DetRate, NondecreasingInSelfishCount) {
  for (int K = 3; K <= 10; ++K)
    for (int t = 2; t < K; ++t)
      for (int S = 1; S <= t - 1; ++S)
        EXPECT_GE(theorem1_rate(K, Rational(t), K, S), theorem1_rate(K, Rational(t), K, S - 1));
}

TEST(ExpectedBlockSize, Identities) {
  const int K = 5;
  const double M = 2, r = 0.7, I = 1000;
  const int N = 5;
  const double q = M * r / N;
  EXPECT_NEAR(expected_block_size(K, M, N, r, K, I), std::pow(q, K) * I / r, 1e-12);
  double total = 0;
  for (int i = 0; i <= K; ++i) total += C(K, i) * expected_block_size(K, M, N, r, i, I);
  EXPECT_NEAR(total, I / r, 1e-9);
  EXPECT_THROW(expected_block_size(K, M, N, 0.0, 1, I), ParameterError);
}

TEST(KnownSymbols, SeriesAgreesWithClosedForm) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> k(2, 30), n(1, 40);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = k(rng), N = n(rng);
    const double M = u(rng) * N, r = u(rng);
    EXPECT_NEAR(known_symbols_count(K, M, N, r), known_series(K, M, N, r), 1e-12 * known_series(K, M, N, r));
  }
}

TEST(KnownSymbols, Boundaries) {
  EXPECT_NEAR(known_symbols_count(4, 4.0, 4, 0.5), 1.0 / 0.5 * (1 - std::pow(1 - 0.5, 4)), 1e-15);
  EXPECT_NEAR(known_symbols_count(3, 2.0, 2, 1.0), 1.0, 1e-15);  // Mr/N = 1
  const double root = solve_rate_root(4, 2.0, 4);
  EXPECT_NEAR(known_symbols_count(4, 2.0, 4, root), 1.0, 1e-8);
}

TEST(FPolynomial, MatchesExpandedPolynomial) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int K = 2 + trial % 10, N = 1 + trial % 7;
    const double M = u(rng) * N, r = u(rng);
    EXPECT_NEAR(f_polynomial(r, K, M, N), f_series(r, K, M, N), 1e-10);
  }
}

TEST(FPolynomial, Examples) {
  EXPECT_NEAR(f_polynomial(1.0, 4, 2.0, 4), std::pow(0.5, 4), 1e-15);
  EXPECT_DOUBLE_EQ(f_polynomial(0.0, 4, 2.0, 4), 1.0 - 2.0 * 4 / 4);
  EXPECT_NEAR(f_polynomial(1e-7, 4, 2.0, 4), -1.0, 1e-6);
  EXPECT_NEAR(f_polynomial(0.91, 4, 2.0, 4), -0.002, 0.001);
  EXPECT_LT(f_polynomial(0.91, 4, 2.0, 4), 0.0);
}

TEST(Root, Examples) {
  const double r = solve_rate_root(4, 2.0, 4);
  EXPECT_NEAR(r, 0.91, 0.01);
  EXPECT_NEAR(r, 0.9127, 0.0005);
  EXPECT_LE(std::abs(f_polynomial(r, 4, 2.0, 4)), 1e-8);
  EXPECT_LT(f_polynomial(r - 1e-6, 4, 2.0, 4), 0.0);
  EXPECT_GT(f_polynomial(r + 1e-6, 4, 2.0, 4), 0.0);
  EXPECT_THROW(solve_rate_root(2, 1.0, 2), InfeasibleError);

  const double rs = solve_rate_root_selfish(5, 2.0, 5, 2);
  EXPECT_NEAR(rs, 0.44, 0.01);
  EXPECT_NEAR(rs, 0.4430, 0.0005);
  EXPECT_LE(std::abs(f_polynomial(rs, 3, 2.0, 5)), 1e-8);
  EXPECT_DOUBLE_EQ(solve_rate_root_selfish(6, 2.0, 5, 0), solve_rate_root(6, 2.0, 5));
  EXPECT_THROW(solve_rate_root_selfish(5, 2.0, 5, 3), InfeasibleError);
}

TEST(Root, ResidualAcrossParameters) {
  for (int K = 2; K <= 40; K += 3)
    for (int N : {2, 5, 17})
      for (double frac : {0.1, 0.4, 0.9}) {
        const double M = frac * N;
        if (M * K / N <= 1.0) continue;
        const double r = solve_rate_root(K, M, N);
        EXPECT_GT(r, 0.0);
        EXPECT_LE(r, 1.0);
        EXPECT_LE(std::abs(f_polynomial(r, K, M, N)), 1e-8) << K << " " << N << " " << M;
      }
}

TEST(Ri, Examples) {
  EXPECT_EQ(transmission_count_Ri(2, 5, 2), Rational(12));
  EXPECT_EQ(transmission_count_Ri(5, 5, 2), Rational(3, 2));
  for (int K = 2; K <= 9; ++K)
    for (int i = 2; i <= K; ++i)
      EXPECT_EQ(transmission_count_Ri(i, K, 0), Rational(binomial(K, i) * i, BigInt(i - 1)));
  EXPECT_THROW(transmission_count_Ri(1, 5, 0), ParameterError);
  EXPECT_THROW(transmission_count_Ri(6, 5, 0), ParameterError);
}

TEST(RandRate, MatchesSubsetWalk) {
  for (int K = 2; K <= 9; ++K)
    for (int S = 0; S < K; ++S)
      for (double r : {0.3, 0.6, 0.95}) {
        const double M = 1.5;
        const int N = 3;
        EXPECT_NEAR(theorem4_rate(K, M, N, S, r), rand_rate_by_subsets(K, M, N, S, r), 1e-9) << K << " " << S;
      }
}

TEST(RandRate, FiveUserValue) {
  const double r = solve_rate_root_selfish(5, 2.0, 5, 2);
  // Recorded value from the literature is 3.05; the formula gives about 2.93.
  EXPECT_NEAR(theorem4_rate(5, 2.0, 5, 2, r), 2.9314, 0.001);
  EXPECT_THROW(theorem4_rate(5, 5.0, 5, 2, 1.0), ParameterError);
}

TEST(Cutset, Examples) {
  EXPECT_EQ(cutset_lower_bound(10, 20.0, 20), 0.0);
  EXPECT_EQ(cutset_lower_bound(10, 25.0, 20), 0.0);
  EXPECT_EQ(cutset_lower_bound(10, 0.0, 20), 10.0);
  EXPECT_EQ(cutset_lower_bound(7, 0.0, 7), 7.0);
  EXPECT_THROW(cutset_lower_bound(5, -1.0, 5), ParameterError);
}

TEST(Cutset, MatchesBruteForceAndMonotone) {
  double prev = 1e300;
  for (int m = 0; m <= 100; ++m) {
    const double b = cutset_lower_bound(50, m, 100);
    EXPECT_NEAR(b, cutset_brute(50, m, 100), 1e-12);
    EXPECT_LE(b, prev);
    prev = b;
  }
  for (int K = 1; K <= 12; ++K)
    for (int N = 1; N <= 12; ++N)
      for (double M : {0.0, 0.5, 1.0, 2.5})
        EXPECT_NEAR(cutset_lower_bound(K, M, N), cutset_brute(K, M, N), 1e-12);
}

TEST(Sweep, DominanceAndMonotonicity) {
  for (auto [K, N, S] : {std::tuple{100, 50, 20}, std::tuple{100, 50, 10}, std::tuple{50, 100, 10}}) {
    auto sweep = rate_memory_sweep(K, N, S);
    ASSERT_FALSE(sweep.empty());
    std::optional<double> prev_det, prev_rand;
    for (const auto& pt : sweep) {
      EXPECT_EQ(pt.cache, Rational(pt.t * N, K));
      if (pt.det) {
        EXPECT_GE(pt.det->analytic_rate, pt.bound);
        if (prev_det) {
          EXPECT_LE(pt.det->analytic_rate, *prev_det);
        }
        prev_det = pt.det->analytic_rate;
        EXPECT_EQ(*pt.det->exact_rate, theorem1_rate(K, pt.cache, N, S));
      }
      if (pt.rand) {
        EXPECT_GE(pt.rand->analytic_rate, pt.bound);
        if (prev_rand) {
          EXPECT_LE(pt.rand->analytic_rate, *prev_rand);
        }
        prev_rand = pt.rand->analytic_rate;
      }
      if (pt.det && pt.rand) {
        EXPECT_LE(pt.det->analytic_rate, pt.rand->analytic_rate);
      }
    }
  }
}

TEST(Sweep, DetPointsRequireTolerance) {
  auto sweep = rate_memory_sweep(10, 10, 3);
  for (const auto& pt : sweep) EXPECT_EQ(pt.det.has_value(), pt.t >= 4);
}
