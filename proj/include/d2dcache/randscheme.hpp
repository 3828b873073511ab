#pragma once

// Random placement of MDS-coded symbols and segment-based delivery.
//
// Every user independently caches MI/N of the n = ceil(I/r) coded symbols of
// each file. The symbols of file i cached by exactly the users in P form the
// block Gamma(i, P). For each subset U (sizes K down to 2) with non-selfish
// members T, each block Gamma(r_v, U\{v}) is delivered to v: in full by the
// single transmitter when |T| = 1, otherwise split into |T|-1 segments that
// are handed out one per member of v's transmitter group.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bytes.hpp"
#include "combinat.hpp"
#include "errors.hpp"

namespace d2dcache {

inline constexpr int kMaxRandUsers = 20;

struct RandConfig {
  int users = 0;   // K
  int files = 0;   // N
  Rational cache;  // M
  UserSubset selfish;
  std::size_t file_bytes = 0;  // B, payload mode only
  std::uint32_t subfiles = 0;  // I
  double code_rate = 1.0;      // r
  std::uint64_t seed = 0;

  int selfish_count() const { return selfish.size(); }

  // n = ceil(I/r).
  std::uint32_t coded_symbols() const {
    const double exact = static_cast<double>(subfiles) / code_rate;
    const double nearest = std::round(exact);
    // Guard against I/r landing a hair above an integer through rounding.
    if (std::abs(exact - nearest) < 1e-9 * exact) return static_cast<std::uint32_t>(nearest);
    return static_cast<std::uint32_t>(std::ceil(exact));
  }

  // MI/N, the per-user per-file cached symbol count.
  std::uint32_t cached_per_file() const {
    Rational m = cache * subfiles / files;
    if (denominator(m) != 1) throw ParameterError("MI/N = " + m.str() + " is not an integer");
    return numerator(m).convert_to<std::uint32_t>();
  }

  // Bytes per coded symbol: ceil(B/I), rounded up to a whole number of GF(2^16) words.
  std::size_t symbol_bytes() const {
    std::size_t w = (file_bytes + subfiles - 1) / subfiles;
    w += w % 2;
    return std::max<std::size_t>(w, 2);
  }

  void validate() const {
    if (users < 2 || users > kMaxRandUsers) throw CapacityError("random scheme supports 2..20 users");
    if (files <= 0 || cache <= 0) throw ParameterError("N and M must be positive");
    if (subfiles == 0) throw ParameterError("I must be positive");
    if (!(code_rate > 0.0 && code_rate <= 1.0)) throw ParameterError("code rate r must lie in (0,1]");
    if (selfish.span() > users) throw ParameterError("selfish set has members outside [0,K)");
    if (cache * (users - selfish_count()) / files <= 1)
      throw InfeasibleError("M(K-S)/N must exceed 1");
    const std::uint32_t m = cached_per_file();
    if (m == 0) throw ParameterError("MI/N must be positive");
    if (m > coded_symbols()) throw ParameterError("MI/N exceeds the code length (Mr/N > 1)");
  }
};

// placement.cached[u][f]: sorted coded-symbol indices of file f cached by user u.
struct RandPlacement {
  std::uint32_t coded = 0;     // n
  std::uint32_t per_file = 0;  // MI/N
  std::vector<std::vector<std::vector<std::uint32_t>>> cached;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Independent generator per (seed, user, file); independent of iteration order.
inline std::mt19937_64 placement_stream(std::uint64_t seed, int user, int file) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ static_cast<std::uint64_t>(user));
  s = splitmix64(s ^ (static_cast<std::uint64_t>(file) << 32));
  return std::mt19937_64(s);
}

// Uniform in [0, bound) by rejection; portable across standard libraries.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % bound;
}

}  // namespace detail

inline RandPlacement rand_place(const RandConfig& cfg) {
  cfg.validate();
  RandPlacement p;
  p.coded = cfg.coded_symbols();
  p.per_file = cfg.cached_per_file();
  p.cached.assign(static_cast<std::size_t>(cfg.users),
                  std::vector<std::vector<std::uint32_t>>(static_cast<std::size_t>(cfg.files)));
  std::vector<std::uint32_t> pool(p.coded);
  for (int u = 0; u < cfg.users; ++u) {
    for (int f = 0; f < cfg.files; ++f) {
      auto rng = detail::placement_stream(cfg.seed, u, f);
      std::iota(pool.begin(), pool.end(), 0u);
      // Partial Fisher-Yates: the first per_file slots are a uniform sample.
      for (std::uint32_t i = 0; i < p.per_file; ++i) {
        auto j = i + static_cast<std::uint32_t>(detail::uniform_below(rng, p.coded - i));
        std::swap(pool[i], pool[j]);
      }
      auto& dst = p.cached[static_cast<std::size_t>(u)][static_cast<std::size_t>(f)];
      dst.assign(pool.begin(), pool.begin() + p.per_file);
      std::sort(dst.begin(), dst.end());
    }
  }
  return p;
}

// blocks[mask]: ascending indices of the symbols cached by exactly the users in mask.
struct ExclusivityPartition {
  int file = 0;
  int users = 0;
  std::vector<std::vector<std::uint32_t>> blocks;

  const std::vector<std::uint32_t>& block(const UserSubset& holders) const {
    return blocks.at(static_cast<std::size_t>(holders.mask()));
  }
};

inline ExclusivityPartition exclusivity_partition(const RandPlacement& placement, int file) {
  const int users = static_cast<int>(placement.cached.size());
  if (users > kMaxRandUsers) throw CapacityError("partition supports at most 20 users");
  std::vector<std::uint32_t> holders(placement.coded, 0);
  for (int u = 0; u < users; ++u)
    for (std::uint32_t idx : placement.cached[static_cast<std::size_t>(u)].at(static_cast<std::size_t>(file)))
      holders[idx] |= 1u << u;
  ExclusivityPartition part;
  part.file = file;
  part.users = users;
  part.blocks.resize(std::size_t{1} << users);
  for (std::uint32_t idx = 0; idx < placement.coded; ++idx) part.blocks[holders[idx]].push_back(idx);
  return part;
}

// One constituent of a segment packet: a segment of block Gamma(file, holders) meant for receiver.
struct Segment {
  int receiver = 0;
  int file = 0;
  UserSubset holders;  // U \ {receiver}
  int index = 0;       // which of the block's segments
  int of = 1;          // number of segments the block was split into
  std::vector<std::uint32_t> symbols;  // coded-symbol indices carried
};

struct SegmentPacket {
  int sender = 0;
  UserSubset context;  // U
  std::vector<Segment> parts;
  std::size_t length = 0;  // in symbols: longest constituent
  Bytes payload;           // empty in index-only runs
};

namespace detail {

inline std::vector<std::uint32_t> slice(const std::vector<std::uint32_t>& block, std::size_t pieces,
                                        std::size_t which) {
  const std::size_t len = (block.size() + pieces - 1) / pieces;
  const std::size_t begin = std::min(block.size(), which * len);
  const std::size_t end = std::min(block.size(), begin + len);
  return {block.begin() + static_cast<std::ptrdiff_t>(begin), block.begin() + static_cast<std::ptrdiff_t>(end)};
}

}  // namespace detail

// Packet metadata for every subset U, ordered by size descending then lexicographically.
inline std::vector<SegmentPacket> rand_deliver(const RandConfig& cfg, const RandPlacement& placement,
                                               std::span<const int> requests) {
  if (static_cast<int>(requests.size()) != cfg.users) throw ParameterError("request vector must have length K");
  for (int r : requests)
    if (r < 0 || r >= cfg.files) throw ParameterError("request outside [0,N)");
  if (cfg.selfish_count() >= cfg.users) throw NoTransmitterError("every user is selfish");

  // Only requested files are ever delivered.
  std::vector<ExclusivityPartition> partitions(static_cast<std::size_t>(cfg.files));
  std::vector<bool> built(static_cast<std::size_t>(cfg.files), false);
  for (int r : requests) {
    if (!built[static_cast<std::size_t>(r)]) {
      partitions[static_cast<std::size_t>(r)] = exclusivity_partition(placement, r);
      built[static_cast<std::size_t>(r)] = true;
    }
  }
  auto block_for = [&](int v, const UserSubset& U) -> const std::vector<std::uint32_t>& {
    return partitions[static_cast<std::size_t>(requests[static_cast<std::size_t>(v)])].block(U.without(v));
  };

  std::vector<SegmentPacket> packets;
  for (int size = cfg.users; size >= 2; --size) {
    for_each_subset(cfg.users, size, [&](const UserSubset& U) {
      const auto members = U.members();
      std::vector<int> active;
      for (int u : members)
        if (!cfg.selfish.contains(u)) active.push_back(u);
      if (active.empty()) return;

      auto make_segment = [&](int v, std::size_t pieces, std::size_t which) {
        Segment s;
        s.receiver = v;
        s.file = requests[static_cast<std::size_t>(v)];
        s.holders = U.without(v);
        s.index = static_cast<int>(which);
        s.of = static_cast<int>(pieces);
        s.symbols = detail::slice(block_for(v, U), pieces, which);
        return s;
      };

      if (active.size() == 1) {
        SegmentPacket p;
        p.sender = active.front();
        p.context = U;
        for (int v : members)
          if (v != p.sender) p.parts.push_back(make_segment(v, 1, 0));
        packets.push_back(std::move(p));
      } else {
        const int star = active.front();
        const std::size_t pieces = active.size() - 1;
        std::vector<SegmentPacket> round(active.size());
        for (std::size_t a = 0; a < active.size(); ++a) {
          round[a].sender = active[a];
          round[a].context = U;
        }
        for (int v : members) {
          const int excluded = cfg.selfish.contains(v) ? star : v;
          std::size_t which = 0;
          for (std::size_t a = 0; a < active.size(); ++a) {
            if (active[a] == excluded) continue;
            round[a].parts.push_back(make_segment(v, pieces, which++));
          }
        }
        for (auto& p : round) packets.push_back(std::move(p));
      }
    });
  }
  for (auto& p : packets)
    for (const auto& s : p.parts) p.length = std::max(p.length, s.symbols.size());
  return packets;
}

}  // namespace d2dcache
