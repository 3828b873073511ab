#pragma once

// Experiment specification, validation and execution for the command-line tool.

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "../analytics.hpp"
#include "../detscheme.hpp"
#include "../harness.hpp"
#include "../parallel.hpp"
#include "../randscheme.hpp"
#include "csv.hpp"

namespace d2dcache::cli {

using nlohmann::json;

enum class RequestPolicy { explicit_vector, uniform, exhaustive };

inline const char* to_string(RequestPolicy p) {
  switch (p) {
    case RequestPolicy::explicit_vector: return "explicit";
    case RequestPolicy::uniform: return "uniform";
    case RequestPolicy::exhaustive: return "exhaustive";
  }
  return "?";
}

inline RequestPolicy parse_request_policy(const std::string& s) {
  if (s == "explicit") return RequestPolicy::explicit_vector;
  if (s == "uniform" || s == "uniform-random") return RequestPolicy::uniform;
  if (s == "exhaustive" || s == "worst-case-exhaustive") return RequestPolicy::exhaustive;
  throw ParameterError("unknown request policy '" + s + "' (explicit|uniform|exhaustive)");
}

struct CacheRange {
  Rational from, to, step;
};

struct ExperimentSpec {
  std::string scheme = "det";  // det | rand
  int users = 0;
  int files = 0;
  std::optional<Rational> cache;
  std::optional<CacheRange> cache_range;
  int selfish = 0;
  std::optional<std::vector<int>> selfish_set;  // default: users 0..S-1
  std::size_t file_bytes = 0;                   // 0 picks a small default
  std::uint32_t subfiles = 0;                   // I
  RequestPolicy request_policy = RequestPolicy::uniform;
  std::vector<int> requests;
  std::size_t request_samples = 200;
  std::optional<double> rate;  // nullopt: auto-root
  std::vector<std::uint64_t> seeds;
  RandMode mode = RandMode::index_only;
  std::string out;
  std::string manifest;
  bool sweep_figure2 = false;
  unsigned workers = default_workers();
};

inline std::string format_rational(const Rational& r) {
  return denominator(r) == 1 ? numerator(r).str() : numerator(r).str() + "/" + denominator(r).str();
}

inline json to_json(const ExperimentSpec& s) {
  json j;
  j["scheme"] = s.scheme;
  j["users"] = s.users;
  j["files"] = s.files;
  if (s.cache) j["cache"] = format_rational(*s.cache);
  if (s.cache_range)
    j["cache_range"] = {format_rational(s.cache_range->from), format_rational(s.cache_range->to),
                        format_rational(s.cache_range->step)};
  j["selfish"] = s.selfish;
  if (s.selfish_set) j["selfish_set"] = *s.selfish_set;
  j["file_bytes"] = s.file_bytes;
  j["symbols"] = s.subfiles;
  j["request_policy"] = to_string(s.request_policy);
  if (!s.requests.empty()) j["requests"] = s.requests;
  j["request_samples"] = s.request_samples;
  j["rate"] = s.rate ? json(*s.rate) : json("auto");
  j["seeds"] = s.seeds;
  j["mode"] = s.mode == RandMode::payload ? "payload" : "index";
  j["sweep_figure2"] = s.sweep_figure2;
  return j;
}

inline Rational rational_from_json(const json& v) {
  if (v.is_string()) return parse_cache(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long long>());
  return parse_cache(v.dump());
}

// Fields present in the JSON override the defaults in `base`.
inline ExperimentSpec spec_from_json(const json& j, ExperimentSpec base = {}) {
  ExperimentSpec s = std::move(base);
  try {
    if (j.contains("scheme")) s.scheme = j.at("scheme").get<std::string>();
    if (j.contains("users")) s.users = j.at("users").get<int>();
    if (j.contains("files")) s.files = j.at("files").get<int>();
    if (j.contains("cache")) s.cache = rational_from_json(j.at("cache"));
    if (j.contains("cache_range")) {
      const auto& r = j.at("cache_range");
      if (!r.is_array() || r.size() != 3) throw ParameterError("cache_range must be [from, to, step]");
      s.cache_range = CacheRange{rational_from_json(r[0]), rational_from_json(r[1]), rational_from_json(r[2])};
    }
    if (j.contains("selfish")) s.selfish = j.at("selfish").get<int>();
    if (j.contains("selfish_set")) s.selfish_set = j.at("selfish_set").get<std::vector<int>>();
    if (j.contains("file_bytes")) s.file_bytes = j.at("file_bytes").get<std::size_t>();
    if (j.contains("symbols")) s.subfiles = j.at("symbols").get<std::uint32_t>();
    if (j.contains("request_policy")) s.request_policy = parse_request_policy(j.at("request_policy").get<std::string>());
    if (j.contains("requests")) s.requests = j.at("requests").get<std::vector<int>>();
    if (j.contains("request_samples")) s.request_samples = j.at("request_samples").get<std::size_t>();
    if (j.contains("rate")) {
      const auto& r = j.at("rate");
      if (r.is_string() && r.get<std::string>() == "auto") s.rate.reset();
      else s.rate = r.get<double>();
    }
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("mode")) {
      const auto m = j.at("mode").get<std::string>();
      if (m != "index" && m != "payload") throw ParameterError("mode must be index or payload");
      s.mode = m == "payload" ? RandMode::payload : RandMode::index_only;
    }
    if (j.contains("sweep_figure2")) s.sweep_figure2 = j.at("sweep_figure2").get<bool>();
    if (j.contains("out")) s.out = j.at("out").get<std::string>();
    if (j.contains("manifest")) s.manifest = j.at("manifest").get<std::string>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("spec file: ") + e.what());
  }
  return s;
}

// Seed used when none is given: $D2DCACHE_SEED, else 1.
inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("D2DCACHE_SEED"); env != nullptr && *env != '\0') {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ParameterError(std::string("D2DCACHE_SEED is not an unsigned integer: ") + env);
    }
  }
  return 1;
}

inline std::string sha256_hex(const void* data, std::size_t size) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data, size, digest, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

inline std::string library_hash(const std::vector<Bytes>& library) {
  Bytes all;
  for (const auto& f : library) all.insert(all.end(), f.begin(), f.end());
  return sha256_hex(all.data(), all.size());
}

struct RunResult {
  std::vector<CsvRow> rows;
  bool all_passed = true;
  bool interrupted = false;
  json resolved = json::object();
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
};

namespace detail {

inline UserSubset resolve_selfish(const ExperimentSpec& s) {
  if (s.selfish < 0 || s.selfish >= s.users) throw ParameterError("--selfish must lie in [0, K)");
  if (!s.selfish_set) return UserSubset::range(0, s.selfish);
  auto set = *s.selfish_set;
  std::sort(set.begin(), set.end());
  auto subset = UserSubset::from_members(set);
  if (subset.size() != s.selfish) throw ParameterError("--selfish-set must list exactly S users");
  if (subset.span() > s.users) throw ParameterError("--selfish-set member outside [0, K)");
  return subset;
}

inline std::vector<Rational> cache_points(const ExperimentSpec& s) {
  if (s.cache_range) {
    const auto& r = *s.cache_range;
    if (r.step <= 0 || r.to < r.from) throw ParameterError("--cache-range needs A <= B and STEP > 0");
    std::vector<Rational> pts;
    for (Rational m = r.from; m <= r.to; m += r.step) pts.push_back(m);
    return pts;
  }
  if (!s.cache) throw ParameterError("--cache or --cache-range is required");
  return {*s.cache};
}

inline std::vector<std::vector<int>> vectors_for(const ExperimentSpec& s, std::uint64_t seed) {
  switch (s.request_policy) {
    case RequestPolicy::explicit_vector:
      return {s.requests};
    case RequestPolicy::uniform:
      return request_vectors(s.users, s.files, RequestSample{false, 1, seed});
    case RequestPolicy::exhaustive:
      return request_vectors(s.users, s.files, RequestSample{true, s.request_samples, seed});
  }
  return {};
}

}  // namespace detail

// Validates the scheme-specific preconditions before any run.
inline void validate(ExperimentSpec& s) {
  if (s.scheme != "det" && s.scheme != "rand") throw ParameterError("--scheme must be det or rand");
  if (s.users < 2) throw ParameterError("--users must be at least 2");
  if (s.files < 1) throw ParameterError("--files must be positive");
  if (s.seeds.empty()) s.seeds.push_back(default_seed());
  if (!s.requests.empty() && s.request_policy == RequestPolicy::uniform)
    s.request_policy = RequestPolicy::explicit_vector;
  if (s.request_policy == RequestPolicy::explicit_vector) check_requests(s.requests, s.users, s.files);
  if (s.rate && !(*s.rate > 0.0 && *s.rate <= 1.0)) throw ParameterError("--rate must lie in (0,1] or be auto");
  detail::resolve_selfish(s);
  if (s.scheme == "rand" && s.subfiles == 0 && !s.sweep_figure2) throw ParameterError("--symbols (I) is required for rand");
}

inline std::vector<CsvRow> analytic_sweep_rows(int users, int files, int selfish) {
  std::vector<CsvRow> rows;
  for (const auto& pt : rate_memory_sweep(users, files, selfish)) {
    for (const auto* rp : {pt.det ? &*pt.det : nullptr, pt.rand ? &*pt.rand : nullptr}) {
      if (rp == nullptr) continue;
      CsvRow row;
      row.scheme = rp->scheme;
      row.users = users;
      row.files = files;
      row.cache = pt.cache;
      row.selfish = selfish;
      row.t = pt.t;
      row.r = rp->r_used;
      row.analytic_rate = rp->analytic_rate;
      row.lower_bound = pt.bound;
      rows.push_back(row);
    }
  }
  return rows;
}

inline RunResult run_experiment(ExperimentSpec spec, const std::atomic<bool>* stop = nullptr) {
  validate(spec);
  RunResult result;
  result.resolved["seeds"] = spec.seeds;

  if (spec.sweep_figure2) {
    result.rows = analytic_sweep_rows(spec.users, spec.files, spec.selfish);
    result.resolved["points"] = result.rows.size();
    return result;
  }

  const UserSubset selfish = detail::resolve_selfish(spec);
  result.resolved["selfish_set"] = selfish.members();
  json points = json::array();
  auto skip = [&](json& point, const Error& e) {
    point["skipped"] = e.what();
    points.push_back(point);
    result.warnings.push_back("M=" + point["M"].get<std::string>() + " skipped: " + e.what());
  };

  for (const Rational& m : detail::cache_points(spec)) {
    if (stop != nullptr && stop->load()) {
      result.interrupted = true;
      break;
    }
    const double md = m.convert_to<double>();
    const double bound = cutset_lower_bound(spec.users, md, spec.files);
    json point;
    point["M"] = format_rational(m);

    if (spec.scheme == "det") {
      DetConfig cfg;
      try {
        const int t = compute_t(spec.users, m, spec.files);
        const std::size_t b = spec.file_bytes != 0 ? spec.file_bytes
                                                   : static_cast<std::size_t>(binomial_u64(spec.users, t)) * t * 4;
        cfg = DetConfig::make(spec.users, spec.files, m, selfish, b);
      } catch (const Error& e) {
        if (!spec.cache_range) throw;
        skip(point, e);
        continue;
      }
      const int t = cfg.t;
      const Rational analytic = theorem1_rate(spec.users, m, spec.files, spec.selfish);
      point["t"] = t;
      point["theorem1_rate"] = format_rational(analytic);
      json hashes = json::array();

      auto rows = parallel_map(spec.seeds.size(), spec.workers, [&](std::size_t i) {
        const std::uint64_t seed = spec.seeds[i];
        auto library = make_library(cfg.files, cfg.file_bytes, seed);
        auto placement = det_place(cfg, library);
        bool ok = true;
        Rational worst_rate = 0;
        std::string failure;
        for (const auto& req : detail::vectors_for(spec, seed)) {
          auto rep = run_det_experiment(cfg, library, placement, req);
          if (!rep.success && ok) {
            ok = false;
            failure = describe(cfg) + " seed=" + std::to_string(seed) + ": decode failed";
          }
          worst_rate = std::max(worst_rate, rep.empirical_rate);
        }
        CsvRow row;
        row.scheme = "det";
        row.users = spec.users;
        row.files = spec.files;
        row.cache = m;
        row.selfish = spec.selfish;
        row.t = t;
        row.analytic_rate = analytic.convert_to<double>();
        row.empirical_rate = worst_rate.convert_to<double>();
        row.lower_bound = bound;
        row.seed = seed;
        row.decode_success = ok;
        return std::make_tuple(row, library_hash(library), failure);
      });
      for (auto& [row, hash, failure] : rows) {
        hashes.push_back({{"seed", *row.seed}, {"library_sha256", hash}});
        if (!*row.decode_success) {
          result.all_passed = false;
          result.failures.push_back(failure);
        }
        result.rows.push_back(row);
      }
      point["libraries"] = hashes;
    } else {
      const double r = spec.rate ? *spec.rate : solve_rate_root_selfish(spec.users, md, spec.files, spec.selfish);
      RandConfig base;
      base.users = spec.users;
      base.files = spec.files;
      base.cache = m;
      base.selfish = selfish;
      base.subfiles = spec.subfiles;
      base.code_rate = r;
      base.file_bytes = spec.file_bytes != 0 ? spec.file_bytes : static_cast<std::size_t>(spec.subfiles) * 2;
      try {
        base.validate();
      } catch (const Error& e) {
        if (!spec.cache_range) throw;
        skip(point, e);
        continue;
      }
      std::optional<double> analytic;
      if (md * r / spec.files < 1.0) analytic = theorem4_rate(spec.users, md, spec.files, spec.selfish, r);
      point["r"] = r;
      point["n"] = base.coded_symbols();
      point["r_policy"] = spec.rate ? "explicit" : "auto-root";
      json hashes = json::array();

      auto rows = parallel_map(spec.seeds.size(), spec.workers, [&](std::size_t i) {
        RandConfig cfg = base;
        cfg.seed = spec.seeds[i];
        auto placement = rand_place(cfg);
        std::vector<Bytes> library;
        std::vector<std::vector<Bytes>> coded;
        std::string hash;
        if (spec.mode == RandMode::payload) {
          library = make_library(cfg.files, cfg.file_bytes, cfg.seed);
          coded = encode_library(cfg, library);
          hash = library_hash(library);
        }
        bool ok = true;
        Rational worst_rate = 0;
        std::string failure;
        for (const auto& req : detail::vectors_for(spec, cfg.seed)) {
          auto rep = run_rand_experiment(cfg, placement, req, spec.mode, library,
                                         spec.mode == RandMode::payload ? &coded : nullptr);
          if (!rep.success && ok) {
            ok = false;
            failure = describe(cfg) + " seed=" + std::to_string(cfg.seed) +
                      ": min symbol margin " + std::to_string(rep.min_symbol_margin.value_or(0));
          }
          worst_rate = std::max(worst_rate, rep.empirical_rate);
        }
        CsvRow row;
        row.scheme = "rand";
        row.users = spec.users;
        row.files = spec.files;
        row.cache = m;
        row.selfish = spec.selfish;
        row.r = r;
        row.analytic_rate = analytic;
        row.empirical_rate = worst_rate.convert_to<double>();
        row.lower_bound = bound;
        row.seed = cfg.seed;
        row.decode_success = ok;
        return std::make_tuple(row, hash, failure);
      });
      std::size_t successes = 0;
      for (auto& [row, hash, failure] : rows) {
        if (!hash.empty()) hashes.push_back({{"seed", *row.seed}, {"library_sha256", hash}});
        if (*row.decode_success) {
          ++successes;
        } else {
          result.all_passed = false;
          result.failures.push_back(failure);
        }
        result.rows.push_back(row);
      }
      point["success_fraction"] = static_cast<double>(successes) / static_cast<double>(rows.size());
      if (!hashes.empty()) point["libraries"] = hashes;
    }
    points.push_back(point);
  }
  result.resolved["points"] = points;
  return result;
}

inline json make_manifest(const ExperimentSpec& spec, const RunResult& result, const std::string& csv) {
  json m;
  m["spec"] = to_json(spec);
  m["resolved"] = result.resolved;
  m["resolved"]["all_passed"] = result.all_passed;
  m["resolved"]["interrupted"] = result.interrupted;
  m["results_digest"] = "sha256:" + sha256_hex(csv.data(), csv.size());
  return m;
}

}  // namespace d2dcache::cli
