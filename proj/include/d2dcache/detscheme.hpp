#pragma once

// Deterministic placement and the three-case delivery schedule with
// selfish-user compensation.
//
// Each file is cut into t*C(K,t) subfiles: one group of t subfiles per
// t-subset P of users, cached by exactly the members of P. Within a group,
// subfile j is "assigned" to the j-th smallest member of P, which fixes which
// distinct subfile each member delivers.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bytes.hpp"
#include "combinat.hpp"
#include "errors.hpp"

namespace d2dcache {

// t = MK/N; must be an integer in [1, K-1].
inline int compute_t(int users, const Rational& cache, int files) {
  if (users <= 0 || files <= 0 || cache <= 0) throw ParameterError("K, M and N must be positive");
  Rational t = cache * users / files;
  if (denominator(t) != 1)
    throw UnsupportedParameterError("MK/N = " + t.str() + " is not an integer");
  if (t >= users) throw TrivialCachingError("t = MK/N >= K: every user can cache the whole library");
  return numerator(t).convert_to<int>();
}

struct DetConfig {
  int users = 0;     // K
  int files = 0;     // N
  Rational cache;    // M, in files
  UserSubset selfish;
  std::size_t file_bytes = 0;  // B
  int t = 0;

  int selfish_count() const { return selfish.size(); }

  static DetConfig make(int users, int files, const Rational& cache, const UserSubset& selfish,
                        std::size_t file_bytes) {
    if (users > 30) throw CapacityError("deterministic scheme supports at most 30 users");
    DetConfig cfg;
    cfg.users = users;
    cfg.files = files;
    cfg.cache = cache;
    cfg.selfish = selfish;
    cfg.file_bytes = file_bytes;
    cfg.t = compute_t(users, cache, files);
    if (file_bytes == 0) throw ParameterError("file size B must be positive");
    if (selfish.span() > users) throw ParameterError("selfish set has members outside [0,K)");
    if (selfish.size() > cfg.t - 1)
      throw ToleranceExceededError("S = " + std::to_string(selfish.size()) + " exceeds t-1 = " +
                                   std::to_string(cfg.t - 1));
    return cfg;
  }

  std::uint64_t groups_per_file() const { return binomial_u64(users, t); }
  std::uint64_t subfiles_per_file() const { return groups_per_file() * static_cast<std::uint64_t>(t); }
  std::size_t subfile_bytes() const {
    const auto count = subfiles_per_file();
    return static_cast<std::size_t>((file_bytes + count - 1) / count);
  }
  std::size_t padded_file_bytes() const { return subfile_bytes() * subfiles_per_file(); }
};

struct SubfileId {
  int file = 0;
  UserSubset group;  // size t
  int assignee = 0;  // member of group

  friend bool operator==(const SubfileId&, const SubfileId&) = default;
  friend std::strong_ordering operator<=>(const SubfileId&, const SubfileId&) = default;

  // Position within the file: rank(group) * t + position of the assignee.
  std::uint64_t flat_index(int users) const {
    return subset_rank(group, users) * static_cast<std::uint64_t>(group.size()) +
           static_cast<std::uint64_t>(group.position_of(assignee));
  }

  std::string to_string() const {
    return "w" + std::to_string(file) + "[" + group.to_string() + "#" + std::to_string(assignee) + "]";
  }
};

// One user's cache in the deterministic scheme.
using DetCache = std::map<SubfileId, Bytes>;

struct DetPlacement {
  std::vector<DetCache> caches;  // indexed by user

  std::size_t cached_bytes(int user) const {
    std::size_t total = 0;
    for (const auto& [id, bytes] : caches.at(static_cast<std::size_t>(user))) total += bytes.size();
    return total;
  }
};

// Byte range of a subfile inside the padded file.
inline std::span<const std::uint8_t> subfile_view(const DetConfig& cfg, const Bytes& padded_file,
                                                  const SubfileId& id) {
  const std::size_t w = cfg.subfile_bytes();
  return std::span<const std::uint8_t>(padded_file).subspan(
      static_cast<std::size_t>(id.flat_index(cfg.users)) * w, w);
}

inline Bytes pad_file(const DetConfig& cfg, const Bytes& file) {
  if (file.size() != cfg.file_bytes) throw ParameterError("library file size differs from B");
  Bytes padded = file;
  padded.resize(cfg.padded_file_bytes(), 0);
  return padded;
}

inline DetPlacement det_place(const DetConfig& cfg, std::span<const Bytes> library) {
  if (static_cast<int>(library.size()) != cfg.files) throw ParameterError("library must hold N files");
  DetPlacement placement;
  placement.caches.resize(static_cast<std::size_t>(cfg.users));
  for (int f = 0; f < cfg.files; ++f) {
    const Bytes padded = pad_file(cfg, library[static_cast<std::size_t>(f)]);
    for_each_subset(cfg.users, cfg.t, [&](const UserSubset& group) {
      for (int assignee : group.members()) {
        SubfileId id{f, group, assignee};
        auto view = subfile_view(cfg, padded, id);
        for (int holder : group.members())
          placement.caches[static_cast<std::size_t>(holder)].emplace(id, Bytes(view.begin(), view.end()));
      }
    });
  }
  return placement;
}

enum class PacketPurpose { case1, helper, compensator };

inline const char* to_string(PacketPurpose p) {
  switch (p) {
    case PacketPurpose::case1: return "case1";
    case PacketPurpose::helper: return "helper";
    case PacketPurpose::compensator: return "compensator";
  }
  return "?";
}

struct Packet {
  int sender = 0;
  UserSubset context;  // the (t+1)-subset this packet serves
  std::vector<SubfileId> terms;
  Bytes payload;
  PacketPurpose purpose = PacketPurpose::case1;
  int on_behalf_of = -1;  // selfish user covered, for helper packets
};

struct Schedule {
  std::vector<Packet> packets;
  std::size_t total_bytes = 0;
};

namespace detail {

inline Bytes xor_terms(const DetCache& cache, const std::vector<SubfileId>& terms, int sender) {
  Bytes out;
  for (const auto& id : terms) {
    auto it = cache.find(id);
    if (it == cache.end())
      throw std::logic_error("user " + std::to_string(sender) + " does not cache " + id.to_string());
    xor_into(out, it->second);
  }
  return out;
}

}  // namespace detail

inline void check_requests(std::span<const int> requests, int users, int files) {
  if (static_cast<int>(requests.size()) != users) throw ParameterError("request vector must have length K");
  for (int r : requests)
    if (r < 0 || r >= files) throw ParameterError("request outside [0,N)");
}

// Packets for every (t+1)-subset U, in lexicographic order of U.
inline Schedule det_deliver(const DetConfig& cfg, const DetPlacement& placement, std::span<const int> requests) {
  check_requests(requests, cfg.users, cfg.files);
  const int t = cfg.t;
  if (cfg.selfish.size() > t - 1)
    throw ToleranceExceededError("S exceeds t-1; the deterministic scheme cannot compensate");

  Schedule schedule;
  auto emit = [&](int sender, const UserSubset& ctx, std::vector<SubfileId> terms, PacketPurpose purpose,
                  int behalf) {
    Packet p;
    p.sender = sender;
    p.context = ctx;
    p.payload = detail::xor_terms(placement.caches.at(static_cast<std::size_t>(sender)), terms, sender);
    p.terms = std::move(terms);
    p.purpose = purpose;
    p.on_behalf_of = behalf;
    schedule.total_bytes += p.payload.size();
    schedule.packets.push_back(std::move(p));
  };

  for_each_subset(cfg.users, t + 1, [&](const UserSubset& U) {
    // Subfile of k's request, shared by U\{k}, that member i delivers to k.
    auto useful = [&](int k, int i) {
      return SubfileId{requests[static_cast<std::size_t>(k)], U.without(k), i};
    };
    const auto members = U.members();
    std::vector<int> selfish, active;
    for (int u : members) (cfg.selfish.contains(u) ? selfish : active).push_back(u);

    for (int i : active) {
      std::vector<SubfileId> terms;
      for (int k : members)
        if (k != i) terms.push_back(useful(k, i));
      emit(i, U, std::move(terms), PacketPurpose::case1, -1);
    }

    std::size_t next = 0;
    while (next < selfish.size()) {
      const std::size_t batch = std::min(active.size() - 1, selfish.size() - next);
      std::vector<SubfileId> missing;
      for (std::size_t j = 0; j < batch; ++j) {
        const int s = selfish[next + j];
        const int h = active[j];
        std::vector<SubfileId> terms;
        for (int k : members)
          if (k != s && k != h) terms.push_back(useful(k, s));
        emit(h, U, std::move(terms), PacketPurpose::helper, s);
        missing.push_back(useful(h, s));
      }
      emit(active[batch], U, std::move(missing), PacketPurpose::compensator, -1);
      next += batch;
    }
  });
  return schedule;
}

inline Rational schedule_rate(const Schedule& s, std::size_t file_bytes) {
  if (file_bytes == 0) throw ParameterError("schedule_rate: B must be positive");
  return Rational(static_cast<long long>(s.total_bytes), static_cast<long long>(file_bytes));
}

}  // namespace d2dcache
