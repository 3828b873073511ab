// Command-line driver: run one experiment or a cache sweep, write CSV and a manifest.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "d2dcache/cli/experiment.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size()) throw d2dcache::ParameterError("not an integer list: '" + text + "'");
    out.push_back(v);
  }
  return out;
}

d2dcache::cli::CacheRange parse_range(const std::string& text) {
  auto a = text.find(':');
  auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos) throw d2dcache::ParameterError("--cache-range must be A:B:STEP");
  using d2dcache::cli::parse_cache;
  return {parse_cache(text.substr(0, a)), parse_cache(text.substr(a + 1, b - a - 1)), parse_cache(text.substr(b + 1))};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw d2dcache::IoError("cannot open " + path + " for writing");
  out << text;
  if (!out.flush()) throw d2dcache::IoError("write to " + path + " failed");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace d2dcache;
  using namespace d2dcache::cli;

  CLI::App app{"Coded caching over D2D networks with selfish users"};
  std::string config_path, scheme, cache, cache_range, selfish_set, requests, policy, rate, seeds, mode;
  int users = 0, files = 0, selfish = -1;
  std::size_t file_bytes = 0, samples = 0;
  std::uint32_t symbols = 0;
  unsigned workers = 0;
  std::string out_path, manifest_path;
  bool figure2 = false;

  app.add_option("--config", config_path, "JSON experiment spec; flags override its fields");
  app.add_option("--scheme", scheme, "det or rand");
  app.add_option("--users,-K", users, "number of users K");
  app.add_option("--files,-N", files, "library size N");
  app.add_option("--cache,-M", cache, "cache size M in files (decimal or p/q)");
  app.add_option("--cache-range", cache_range, "sweep M over A:B:STEP");
  app.add_option("--selfish,-S", selfish, "number of selfish users S");
  app.add_option("--selfish-set", selfish_set, "comma-separated selfish user indices");
  app.add_option("--requests", requests, "comma-separated demand vector d_0..d_{K-1}");
  app.add_option("--request-policy", policy, "explicit | uniform | exhaustive");
  app.add_option("--request-samples", samples, "vectors drawn when exhaustive enumeration is too large");
  app.add_option("--symbols,-I", symbols, "source symbols per file I (rand)");
  app.add_option("--file-size", file_bytes, "bytes per file B");
  app.add_option("--rate", rate, "MDS code rate r in (0,1] or 'auto'");
  app.add_option("--seeds", seeds, "comma-separated seeds (default $D2DCACHE_SEED or 1)");
  app.add_option("--mode", mode, "index or payload (rand)");
  app.add_option("--workers", workers, "worker threads");
  app.add_option("--out", out_path, "CSV output path (stdout if omitted)");
  app.add_option("--manifest", manifest_path, "JSON manifest output path");
  app.add_flag("--sweep-figure2", figure2, "analytic rate-memory curves over M = tN/K");
  CLI11_PARSE(app, argc, argv);

  ExperimentSpec spec;
  RunResult result;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw IoError("cannot read " + config_path);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw ParameterError(config_path + ": " + e.what());
      }
      spec = spec_from_json(j);
    }
    if (!scheme.empty()) spec.scheme = scheme;
    if (users != 0) spec.users = users;
    if (files != 0) spec.files = files;
    if (!cache.empty()) spec.cache = parse_cache(cache);
    if (!cache_range.empty()) spec.cache_range = parse_range(cache_range);
    if (selfish >= 0) spec.selfish = selfish;
    if (!selfish_set.empty()) spec.selfish_set = parse_int_list(selfish_set);
    if (!requests.empty()) spec.requests = parse_int_list(requests);
    if (!policy.empty()) spec.request_policy = parse_request_policy(policy);
    if (samples != 0) spec.request_samples = samples;
    if (symbols != 0) spec.subfiles = symbols;
    if (file_bytes != 0) spec.file_bytes = file_bytes;
    if (!rate.empty()) {
      if (rate == "auto") spec.rate.reset();
      else spec.rate = std::stod(rate);
    }
    if (!seeds.empty()) {
      spec.seeds.clear();
      std::stringstream ss(seeds);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item.find_first_not_of("0123456789") != std::string::npos)
          throw ParameterError("seeds must be nonnegative integers: '" + seeds + "'");
        spec.seeds.push_back(std::stoull(item));
      }
    }
    if (!mode.empty()) {
      if (mode != "index" && mode != "payload") throw ParameterError("--mode must be index or payload");
      spec.mode = mode == "payload" ? RandMode::payload : RandMode::index_only;
    }
    if (workers != 0) spec.workers = workers;
    if (!out_path.empty()) spec.out = out_path;
    if (!manifest_path.empty()) spec.manifest = manifest_path;
    spec.sweep_figure2 = spec.sweep_figure2 || figure2;

    std::signal(SIGINT, on_sigint);
    validate(spec);
    result = run_experiment(spec, &g_stop);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: malformed number (" << e.what() << ")\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: number out of range (" << e.what() << ")\n";
    return 2;
  }

  try {
    const std::string csv = csv_text(result.rows);
    if (spec.out.empty()) std::cout << csv;
    else write_file(spec.out, csv);
    if (!spec.manifest.empty()) write_file(spec.manifest, make_manifest(spec, result, csv).dump(2) + "\n");
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& f : result.failures) std::cerr << "decode failure: " << f << '\n';
  if (result.interrupted) {
    std::cerr << "interrupted; partial results written\n";
    return 130;
  }
  return result.all_passed ? 0 : 1;
}
