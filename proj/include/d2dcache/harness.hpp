#pragma once

// Error-free broadcast medium, per-user decoders and end-to-end experiments.
//
// Every transmission goes into one append-only BroadcastLog that all users
// read. A decoder sees only that log, its own cache and the request vector.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bytes.hpp"
#include "combinat.hpp"
#include "detscheme.hpp"
#include "errors.hpp"
#include "mds.hpp"
#include "parallel.hpp"
#include "randscheme.hpp"

namespace d2dcache {

template <typename Transmission>
class BroadcastLog {
 public:
  void append(Transmission tx) { entries_.push_back(std::move(tx)); }
  const std::vector<Transmission>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Transmission> entries_;
};

struct UserOutcome {
  bool decoded = false;
  bool byte_exact = false;
  std::string failure;
  std::size_t symbols_available = 0;  // random scheme only
  Bytes recovered;
};

struct DecodeReport {
  std::string scheme;  // "det" or "rand"
  std::string config;
  std::uint64_t seed = 0;
  std::vector<int> requests;
  std::vector<UserOutcome> users;
  // Every user decoded: byte-exact in det/payload runs, >= I symbols in index-only runs.
  bool success = false;
  bool byte_exact = false;  // only meaningful when payloads were simulated
  Rational empirical_rate;
  std::size_t transmissions = 0;
  std::optional<long long> min_symbol_margin;
};

inline std::vector<Bytes> make_library(int files, std::size_t file_bytes, std::uint64_t seed) {
  std::mt19937_64 rng(detail::splitmix64(seed ^ 0x6C69627261727921ull));
  std::vector<Bytes> lib(static_cast<std::size_t>(files), Bytes(file_bytes));
  for (auto& f : lib)
    for (auto& b : f) b = static_cast<std::uint8_t>(rng() >> 56);
  return lib;
}

inline std::string describe(const DetConfig& c) {
  std::ostringstream os;
  os << "det K=" << c.users << " N=" << c.files << " M=" << c.cache << " S=" << c.selfish_count()
     << " selfish=" << c.selfish.to_string() << " t=" << c.t << " B=" << c.file_bytes;
  return os.str();
}

inline std::string describe(const RandConfig& c) {
  std::ostringstream os;
  os << "rand K=" << c.users << " N=" << c.files << " M=" << c.cache << " S=" << c.selfish_count()
     << " selfish=" << c.selfish.to_string() << " I=" << c.subfiles << " r=" << c.code_rate << " B=" << c.file_bytes;
  return os.str();
}

// ---------------------------------------------------------------------------
// Deterministic scheme

// Schedule-ordered peeling: each pass recovers packets with exactly one unknown term.
inline UserOutcome det_decode(const DetConfig& cfg, int user, const BroadcastLog<Packet>& log,
                              const DetCache& own, std::span<const int> requests) {
  std::map<SubfileId, Bytes> learned;
  auto lookup = [&](const SubfileId& id) -> const Bytes* {
    if (auto it = own.find(id); it != own.end()) return &it->second;
    if (auto it = learned.find(id); it != learned.end()) return &it->second;
    return nullptr;
  };

  std::vector<bool> done(log.size(), false);
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t p = 0; p < log.size(); ++p) {
      if (done[p]) continue;
      const Packet& pkt = log.entries()[p];
      const SubfileId* unknown = nullptr;
      int unknown_count = 0;
      for (const auto& id : pkt.terms) {
        if (lookup(id) == nullptr) {
          unknown = &id;
          ++unknown_count;
        }
      }
      if (unknown_count > 1) continue;
      done[p] = true;
      if (unknown_count == 0) continue;
      Bytes value = pkt.payload;
      for (const auto& id : pkt.terms)
        if (&id != unknown) xor_into(value, *lookup(id));
      value.resize(cfg.subfile_bytes());
      learned.emplace(*unknown, std::move(value));
      progress = true;
    }
  }

  UserOutcome out;
  const int want = requests[static_cast<std::size_t>(user)];
  Bytes file;
  file.reserve(cfg.padded_file_bytes());
  bool complete = true;
  for_each_subset(cfg.users, cfg.t, [&](const UserSubset& group) {
    if (!complete) return;
    for (int a : group.members()) {
      SubfileId id{want, group, a};
      const Bytes* piece = lookup(id);
      if (piece == nullptr) {
        out.failure = "missing subfile " + id.to_string();
        complete = false;
        return;
      }
      file.insert(file.end(), piece->begin(), piece->end());
    }
  });
  if (!complete) return out;
  file.resize(cfg.file_bytes);
  out.decoded = true;
  out.recovered = std::move(file);
  return out;
}

// Uses a precomputed placement; the library must be the one it was built from.
inline DecodeReport run_det_experiment(const DetConfig& cfg, std::span<const Bytes> library,
                                       const DetPlacement& placement, std::span<const int> requests) {
  Schedule schedule = det_deliver(cfg, placement, requests);
  BroadcastLog<Packet> log;
  for (auto& p : schedule.packets) log.append(std::move(p));

  DecodeReport report;
  report.scheme = "det";
  report.config = describe(cfg);
  report.requests.assign(requests.begin(), requests.end());
  report.transmissions = log.size();
  report.empirical_rate = Rational(static_cast<long long>(schedule.total_bytes),
                                   static_cast<long long>(cfg.padded_file_bytes()));
  report.success = true;
  for (int u = 0; u < cfg.users; ++u) {
    UserOutcome o = det_decode(cfg, u, log, placement.caches[static_cast<std::size_t>(u)], requests);
    if (o.decoded) {
      o.byte_exact = o.recovered == library[static_cast<std::size_t>(requests[static_cast<std::size_t>(u)])];
      if (!o.byte_exact) o.failure = "recovered bytes differ from library file";
    }
    report.success = report.success && o.byte_exact;
    report.users.push_back(std::move(o));
  }
  report.byte_exact = report.success;
  return report;
}

inline DecodeReport run_det_experiment(const DetConfig& cfg, std::span<const int> requests,
                                       std::uint64_t library_seed = 0) {
  auto library = make_library(cfg.files, cfg.file_bytes, library_seed);
  auto placement = det_place(cfg, library);
  auto report = run_det_experiment(cfg, library, placement, requests);
  report.seed = library_seed;
  return report;
}

// ---------------------------------------------------------------------------
// Random scheme

enum class RandMode { index_only, payload };

// One user's cached coded symbols; data is empty in index-only runs.
struct RandUserCache {
  struct FileSlice {
    std::vector<std::uint32_t> indices;  // ascending
    Bytes data;                          // indices.size() * symbol width
  };
  std::size_t symbol_bytes = 0;
  std::vector<FileSlice> files;

  const std::uint8_t* symbol(int file, std::uint32_t idx) const {
    const auto& s = files[static_cast<std::size_t>(file)];
    auto it = std::lower_bound(s.indices.begin(), s.indices.end(), idx);
    if (it == s.indices.end() || *it != idx || s.data.empty()) return nullptr;
    return s.data.data() + static_cast<std::size_t>(it - s.indices.begin()) * symbol_bytes;
  }
};

// Coded symbols of every file: coded[f][j], j < n.
inline std::vector<std::vector<Bytes>> encode_library(const RandConfig& cfg, std::span<const Bytes> library) {
  const std::size_t w = cfg.symbol_bytes();
  const MdsCode code(static_cast<int>(cfg.subfiles), static_cast<int>(cfg.coded_symbols()));
  std::vector<std::vector<Bytes>> coded;
  for (const auto& file : library) {
    if (file.size() != cfg.file_bytes) throw ParameterError("library file size differs from B");
    std::vector<Bytes> source(cfg.subfiles, Bytes(w, 0));
    for (std::size_t i = 0; i < file.size(); ++i) source[i / w][i % w] = file[i];
    coded.push_back(code.encode(source));
  }
  return coded;
}

inline std::vector<RandUserCache> build_rand_caches(const RandConfig& cfg, const RandPlacement& placement,
                                                    const std::vector<std::vector<Bytes>>* coded) {
  std::vector<RandUserCache> caches(static_cast<std::size_t>(cfg.users));
  const std::size_t w = cfg.symbol_bytes();
  for (int u = 0; u < cfg.users; ++u) {
    auto& c = caches[static_cast<std::size_t>(u)];
    c.symbol_bytes = w;
    c.files.resize(static_cast<std::size_t>(cfg.files));
    for (int f = 0; f < cfg.files; ++f) {
      auto& slice = c.files[static_cast<std::size_t>(f)];
      slice.indices = placement.cached[static_cast<std::size_t>(u)][static_cast<std::size_t>(f)];
      if (coded == nullptr) continue;
      slice.data.reserve(slice.indices.size() * w);
      for (std::uint32_t idx : slice.indices) {
        const Bytes& sym = (*coded)[static_cast<std::size_t>(f)][idx];
        slice.data.insert(slice.data.end(), sym.begin(), sym.end());
      }
    }
  }
  return caches;
}

namespace detail {

inline Bytes gather_segment(const RandUserCache& cache, const Segment& seg, int who) {
  Bytes out;
  out.reserve(seg.symbols.size() * cache.symbol_bytes);
  for (std::uint32_t idx : seg.symbols) {
    const std::uint8_t* sym = cache.symbol(seg.file, idx);
    if (sym == nullptr)
      throw std::logic_error("user " + std::to_string(who) + " lacks symbol " + std::to_string(idx) + " of file " +
                             std::to_string(seg.file));
    out.insert(out.end(), sym, sym + cache.symbol_bytes);
  }
  return out;
}

}  // namespace detail

// Fills each packet's payload from its sender's own cache.
inline void render_payloads(std::vector<SegmentPacket>& packets, const std::vector<RandUserCache>& caches) {
  for (auto& p : packets) {
    const auto& cache = caches[static_cast<std::size_t>(p.sender)];
    p.payload.assign(p.length * cache.symbol_bytes, 0);
    for (const auto& seg : p.parts) xor_into(p.payload, detail::gather_segment(cache, seg, p.sender));
  }
}

inline UserOutcome rand_decode(const RandConfig& cfg, int user, const BroadcastLog<SegmentPacket>& log,
                               const RandUserCache& own, std::span<const int> requests, RandMode mode) {
  const std::uint32_t n = cfg.coded_symbols();
  const int want = requests[static_cast<std::size_t>(user)];

  std::map<int, std::vector<char>> cached;  // file -> membership bitmap, built on demand
  auto has = [&](int file, std::uint32_t idx) {
    auto [it, fresh] = cached.try_emplace(file);
    if (fresh) {
      it->second.assign(n, 0);
      for (std::uint32_t i : own.files[static_cast<std::size_t>(file)].indices) it->second[i] = 1;
    }
    return it->second[idx] != 0;
  };

  std::vector<char> have(n, 0);
  for (std::uint32_t i : own.files[static_cast<std::size_t>(want)].indices) have[i] = 1;
  std::map<std::uint32_t, Bytes> received;

  for (const auto& pkt : log.entries()) {
    for (const auto& mine : pkt.parts) {
      if (mine.receiver != user) continue;
      bool solvable = true;
      for (const auto& other : pkt.parts) {
        if (&other == &mine) continue;
        for (std::uint32_t idx : other.symbols)
          if (!has(other.file, idx)) {
            solvable = false;
            break;
          }
        if (!solvable) break;
      }
      if (!solvable) continue;
      for (std::uint32_t idx : mine.symbols) have[idx] = 1;
      if (mode == RandMode::payload) {
        Bytes value = pkt.payload;
        for (const auto& other : pkt.parts)
          if (&other != &mine) xor_into(value, detail::gather_segment(own, other, user));
        const std::size_t w = own.symbol_bytes;
        for (std::size_t s = 0; s < mine.symbols.size(); ++s)
          received.emplace(mine.symbols[s],
                           Bytes(value.begin() + static_cast<std::ptrdiff_t>(s * w),
                                 value.begin() + static_cast<std::ptrdiff_t>((s + 1) * w)));
      }
    }
  }

  UserOutcome out;
  out.symbols_available = static_cast<std::size_t>(std::count(have.begin(), have.end(), 1));
  if (out.symbols_available < cfg.subfiles) {
    out.failure = "insufficient symbols: " + std::to_string(out.symbols_available) + " < I = " +
                  std::to_string(cfg.subfiles);
    return out;
  }
  if (mode == RandMode::index_only) {
    out.decoded = true;
    return out;
  }

  std::vector<std::pair<int, Bytes>> symbols;
  const auto& mine = own.files[static_cast<std::size_t>(want)];
  for (std::size_t i = 0; i < mine.indices.size(); ++i)
    symbols.emplace_back(static_cast<int>(mine.indices[i]),
                         Bytes(mine.data.begin() + static_cast<std::ptrdiff_t>(i * own.symbol_bytes),
                               mine.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * own.symbol_bytes)));
  for (auto& [idx, bytes] : received) symbols.emplace_back(static_cast<int>(idx), std::move(bytes));
  try {
    const MdsCode code(static_cast<int>(cfg.subfiles), static_cast<int>(n));
    auto source = code.decode(symbols);
    Bytes file;
    for (const auto& s : source) file.insert(file.end(), s.begin(), s.end());
    file.resize(cfg.file_bytes);
    out.recovered = std::move(file);
    out.decoded = true;
  } catch (const InsufficientSymbolsError& e) {
    out.failure = e.what();
  }
  return out;
}

// Placement (and, in payload mode, the coded library) supplied by the caller.
inline DecodeReport run_rand_experiment(const RandConfig& cfg, const RandPlacement& placement,
                                        std::span<const int> requests, RandMode mode,
                                        std::span<const Bytes> library = {},
                                        const std::vector<std::vector<Bytes>>* coded = nullptr) {
  std::vector<std::vector<Bytes>> own_coded;
  if (mode == RandMode::payload && coded == nullptr) {
    own_coded = encode_library(cfg, library);
    coded = &own_coded;
  }
  auto caches = build_rand_caches(cfg, placement, mode == RandMode::payload ? coded : nullptr);
  auto packets = rand_deliver(cfg, placement, requests);
  if (mode == RandMode::payload) render_payloads(packets, caches);

  DecodeReport report;
  report.scheme = "rand";
  report.config = describe(cfg);
  report.seed = cfg.seed;
  report.requests.assign(requests.begin(), requests.end());
  std::size_t symbols_sent = 0;
  BroadcastLog<SegmentPacket> log;
  for (auto& p : packets) {
    symbols_sent += p.length;
    log.append(std::move(p));
  }
  report.transmissions = log.size();
  report.empirical_rate = Rational(static_cast<long long>(symbols_sent), static_cast<long long>(cfg.subfiles));

  report.success = true;
  report.byte_exact = mode == RandMode::payload;
  long long margin = std::numeric_limits<long long>::max();
  for (int u = 0; u < cfg.users; ++u) {
    UserOutcome o = rand_decode(cfg, u, log, caches[static_cast<std::size_t>(u)], requests, mode);
    margin = std::min(margin, static_cast<long long>(o.symbols_available) - static_cast<long long>(cfg.subfiles));
    if (mode == RandMode::payload && o.decoded) {
      o.byte_exact = o.recovered == library[static_cast<std::size_t>(requests[static_cast<std::size_t>(u)])];
      if (!o.byte_exact) o.failure = "recovered bytes differ from library file";
    }
    const bool ok = mode == RandMode::payload ? o.byte_exact : o.decoded;
    report.success = report.success && ok;
    report.byte_exact = report.byte_exact && o.byte_exact;
    report.users.push_back(std::move(o));
  }
  report.min_symbol_margin = margin;
  return report;
}

// Library derived from cfg.seed in payload mode.
inline DecodeReport run_rand_experiment(const RandConfig& cfg, std::span<const int> requests, RandMode mode) {
  auto placement = rand_place(cfg);
  std::vector<Bytes> library;
  if (mode == RandMode::payload) library = make_library(cfg.files, cfg.file_bytes, cfg.seed);
  return run_rand_experiment(cfg, placement, requests, mode, library);
}

// ---------------------------------------------------------------------------
// Worst-case error estimation

struct RequestSample {
  bool all = true;            // exhaustive when N^K <= kExhaustiveLimit
  std::size_t count = 200;    // sample size otherwise
  std::uint64_t seed = 0;

  static constexpr std::uint64_t kExhaustiveLimit = 4096;
};

inline std::vector<std::vector<int>> request_vectors(int users, int files, const RequestSample& sample) {
  BigInt total = 1;
  for (int u = 0; u < users; ++u) total *= files;
  std::vector<std::vector<int>> out;
  if (sample.all && total <= RequestSample::kExhaustiveLimit) {
    std::vector<int> v(static_cast<std::size_t>(users), 0);
    while (true) {
      out.push_back(v);
      int i = users - 1;
      while (i >= 0 && v[static_cast<std::size_t>(i)] == files - 1) v[static_cast<std::size_t>(i--)] = 0;
      if (i < 0) break;
      ++v[static_cast<std::size_t>(i)];
    }
    return out;
  }
  std::mt19937_64 rng(detail::splitmix64(sample.seed ^ 0x7265717565737473ull));
  for (std::size_t s = 0; s < sample.count; ++s) {
    std::vector<int> v(static_cast<std::size_t>(users));
    for (auto& r : v) r = static_cast<int>(detail::uniform_below(rng, static_cast<std::uint64_t>(files)));
    out.push_back(std::move(v));
  }
  return out;
}

struct WorstCaseError {
  double failure = 0.0;  // max over request vectors
  std::size_t vectors = 0;
  std::size_t runs = 0;
  std::vector<int> worst_requests;
  std::optional<long long> min_symbol_margin;
};

inline WorstCaseError estimate_worst_case_error(const DetConfig& cfg, const RequestSample& sample,
                                                std::uint64_t library_seed = 0) {
  auto library = make_library(cfg.files, cfg.file_bytes, library_seed);
  auto placement = det_place(cfg, library);
  WorstCaseError est;
  for (const auto& req : request_vectors(cfg.users, cfg.files, sample)) {
    const bool failed = !run_det_experiment(cfg, library, placement, req).success;
    ++est.vectors;
    ++est.runs;
    if (failed && est.failure == 0.0) {
      est.failure = 1.0;
      est.worst_requests = req;
    }
  }
  return est;
}

// Failure frequency over seeds for each request vector, maximized over vectors.
inline WorstCaseError estimate_worst_case_error(const RandConfig& cfg, std::span<const std::uint64_t> seeds,
                                                const RequestSample& sample, RandMode mode,
                                                unsigned workers = default_workers()) {
  const auto vectors = request_vectors(cfg.users, cfg.files, sample);
  struct SeedResult {
    std::vector<char> failed;
    long long margin;
  };
  auto per_seed = parallel_map(seeds.size(), workers, [&](std::size_t s) {
    RandConfig c = cfg;
    c.seed = seeds[s];
    auto placement = rand_place(c);
    std::vector<Bytes> library;
    std::vector<std::vector<Bytes>> coded;
    if (mode == RandMode::payload) {
      library = make_library(c.files, c.file_bytes, c.seed);
      coded = encode_library(c, library);
    }
    SeedResult r{std::vector<char>(vectors.size(), 0), std::numeric_limits<long long>::max()};
    for (std::size_t v = 0; v < vectors.size(); ++v) {
      auto rep = run_rand_experiment(c, placement, vectors[v], mode, library,
                                     mode == RandMode::payload ? &coded : nullptr);
      r.failed[v] = rep.success ? 0 : 1;
      r.margin = std::min(r.margin, rep.min_symbol_margin.value_or(r.margin));
    }
    return r;
  });

  WorstCaseError est;
  est.vectors = vectors.size();
  est.runs = vectors.size() * seeds.size();
  long long margin = std::numeric_limits<long long>::max();
  for (const auto& r : per_seed) margin = std::min(margin, r.margin);
  if (!seeds.empty()) est.min_symbol_margin = margin;
  double worst = -1.0;
  for (std::size_t v = 0; v < vectors.size(); ++v) {
    std::size_t fails = 0;
    for (const auto& r : per_seed) fails += static_cast<std::size_t>(r.failed[v]);
    const double freq = seeds.empty() ? 0.0 : static_cast<double>(fails) / static_cast<double>(seeds.size());
    if (freq > worst) {
      worst = freq;
      est.worst_requests = vectors[v];
    }
  }
  est.failure = std::max(worst, 0.0);
  return est;
}

}  // namespace d2dcache
