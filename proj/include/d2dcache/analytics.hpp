#pragma once

// Closed-form rates, expected counts, code-rate root solving and the cut-set bound.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "combinat.hpp"
#include "detscheme.hpp"
#include "errors.hpp"

namespace d2dcache {

// Achievable rate of the deterministic scheme, exact:
//   1/(t C(K,t)) * sum_{i=0..S} C(S,i) C(K-S,t+1-i) (t+1+ceil(i/(t-i))).
inline Rational theorem1_rate(int users, const Rational& cache, int files, int selfish) {
  const int t = compute_t(users, cache, files);
  if (selfish < 0 || selfish > t - 1)
    throw ToleranceExceededError("S must lie in [0, t-1] for the deterministic scheme");
  BigInt transmissions = 0;
  for (int i = 0; i <= selfish; ++i) {
    const int extra = (i + (t - i) - 1) / (t - i);  // ceil(i / (t-i))
    transmissions += binomial(selfish, i) * binomial(users - selfish, t + 1 - i) * (t + 1 + extra);
  }
  return Rational(transmissions, binomial(users, t) * t);
}

// Expected |Gamma(i,P)| for |P| = p_size: (Mr/N)^p (1-Mr/N)^(K-p) I/r.
inline double expected_block_size(int users, double cache, int files, double rate, int p_size, double subfiles) {
  const double q = cache * rate / files;
  if (!(q > 0.0 && q <= 1.0)) throw ParameterError("expected_block_size requires 0 < Mr/N <= 1");
  return std::pow(q, p_size) * std::pow(1.0 - q, users - p_size) * subfiles / rate;
}

// Known coded symbols of a requested file, as a fraction of I: (1/r)(1 - (1-Mr/N)^K).
inline double known_symbols_count(int users, double cache, int files, double rate) {
  const double q = cache * rate / files;
  if (!(q > 0.0 && q <= 1.0)) throw ParameterError("known_symbols_count requires 0 < Mr/N <= 1");
  return (1.0 - std::pow(1.0 - q, users)) / rate;
}

// f(r) = (1/r)[(1 - Mr/N)^K - 1] + 1; the limit 1 - MK/N at r -> 0.
inline double f_polynomial(double rate, int users, double cache, int files) {
  if (rate == 0.0) return 1.0 - cache * users / files;
  const double q = cache * rate / files;
  return (std::pow(1.0 - q, users) - 1.0) / rate + 1.0;
}

inline constexpr double kRootTolerance = 1e-9;

// Root of f on (0,1) by bisection. f(0+) = 1 - MK/N < 0 and f(1) > 0 bracket it.
inline double solve_rate_root(int users, double cache, int files) {
  if (!(cache * users / files > 1.0))
    throw InfeasibleError("MK/N must exceed 1: aggregate cache is not larger than the library");
  double lo = 0.0, hi = 1.0;
  if (f_polynomial(hi, users, cache, files) <= 0.0) return hi;
  while (hi - lo > kRootTolerance) {
    const double mid = 0.5 * (lo + hi);
    (f_polynomial(mid, users, cache, files) <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Selfish users cannot serve anyone, so only K-S caches count.
inline double solve_rate_root_selfish(int users, double cache, int files, int selfish) {
  if (!(cache * (users - selfish) / files > 1.0)) throw InfeasibleError("M(K-S)/N must exceed 1");
  return solve_rate_root(users - selfish, cache, files);
}

// Segment-weighted transmissions per i-subset:
//   sum_{j=0..i-2} C(S,j) C(K-S,i-j) (i-j)/(i-j-1) + (K-S) C(S,i-1).
inline Rational transmission_count_Ri(int i, int users, int selfish) {
  if (i < 2 || i > users) throw ParameterError("transmission_count_Ri requires 2 <= i <= K");
  Rational total = 0;
  for (int j = 0; j <= i - 2; ++j)
    total += Rational(binomial(selfish, j) * binomial(users - selfish, i - j) * (i - j), BigInt(i - j - 1));
  total += Rational(binomial(selfish, i - 1) * (users - selfish));
  return total;
}

// Achievable rate of the random scheme: (1/r) sum_{i=2..K} R(i) (Mr/N)^(i-1) (1-Mr/N)^(K-i+1).
inline double theorem4_rate(int users, double cache, int files, int selfish, double rate) {
  const double q = cache * rate / files;
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("theorem4_rate requires 0 < Mr/N < 1");
  double sum = 0.0;
  for (int i = 2; i <= users; ++i)
    sum += transmission_count_Ri(i, users, selfish).convert_to<double>() * std::pow(q, i - 1) *
           std::pow(1.0 - q, users - i + 1);
  return sum / rate;
}

// max over l in 1..min(K,N) of l - (l / floor(N/l)) M, clamped at 0.
inline double cutset_lower_bound(int users, double cache, int files) {
  if (cache < 0) throw ParameterError("cache size must be nonnegative");
  double best = 0.0;
  for (int l = 1; l <= std::min(users, files); ++l) {
    const int share = files / l;
    if (share == 0) continue;
    best = std::max(best, l - static_cast<double>(l) / share * cache);
  }
  return best;
}

struct RatePoint {
  std::string scheme;  // "det" or "rand"
  Rational cache;
  double analytic_rate = 0.0;
  std::optional<Rational> exact_rate;  // deterministic scheme
  std::optional<double> r_used;
  double bound = 0.0;
};

// One pair of curves over the integer-t grid M = tN/K, t = 1..K-1. A scheme
// contributes a point only where its preconditions hold.
struct SweepPoint {
  Rational cache;
  int t = 0;
  std::optional<RatePoint> det;
  std::optional<RatePoint> rand;
  double bound = 0.0;
};

inline std::vector<SweepPoint> rate_memory_sweep(int users, int files, int selfish) {
  std::vector<SweepPoint> out;
  for (int t = 1; t < users; ++t) {
    SweepPoint pt;
    pt.t = t;
    pt.cache = Rational(t * files, users);
    const double m = pt.cache.convert_to<double>();
    pt.bound = cutset_lower_bound(users, m, files);
    if (selfish <= t - 1) {
      RatePoint rp;
      rp.scheme = "det";
      rp.cache = pt.cache;
      rp.exact_rate = theorem1_rate(users, pt.cache, files, selfish);
      rp.analytic_rate = rp.exact_rate->convert_to<double>();
      rp.bound = pt.bound;
      pt.det = rp;
    }
    if (m * (users - selfish) / files > 1.0) {
      const double r = solve_rate_root_selfish(users, m, files, selfish);
      if (m * r / files < 1.0) {
        RatePoint rp;
        rp.scheme = "rand";
        rp.cache = pt.cache;
        rp.r_used = r;
        rp.analytic_rate = theorem4_rate(users, m, files, selfish, r);
        rp.bound = pt.bound;
        pt.rand = rp;
      }
    }
    if (pt.det || pt.rand) out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace d2dcache
