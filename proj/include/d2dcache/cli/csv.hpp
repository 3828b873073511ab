#pragma once

// Result CSV: one row per (point, seed).
//   scheme,K,N,M,S,t,r,analytic_rate,empirical_rate,lower_bound,seed,decode_success
// Real-valued columns carry 6 significant digits; inapplicable columns are empty.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "../analytics.hpp"
#include "../combinat.hpp"
#include "../errors.hpp"

namespace d2dcache::cli {

inline constexpr const char* kCsvHeader =
    "scheme,K,N,M,S,t,r,analytic_rate,empirical_rate,lower_bound,seed,decode_success";

struct CsvRow {
  std::string scheme;
  int users = 0;
  int files = 0;
  Rational cache;
  int selfish = 0;
  std::optional<int> t;
  std::optional<double> r;
  std::optional<double> analytic_rate;
  std::optional<double> empirical_rate;
  std::optional<double> lower_bound;
  std::optional<std::uint64_t> seed;
  std::optional<bool> decode_success;
};

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.6g", v);
  return buf;
}

// Integral values print as integers, others with up to 6 significant digits.
inline std::string format_cache(const Rational& m) {
  if (denominator(m) == 1) return numerator(m).str();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", m.convert_to<double>());
  return buf;
}

inline Rational parse_cache(const std::string& text) {
  if (text.empty()) throw ParameterError("empty cache size");
  if (text.find_first_not_of("0123456789./") != std::string::npos)
    throw ParameterError("cache size '" + text + "' is not a nonnegative decimal or fraction");
  if (auto slash = text.find('/'); slash != std::string::npos)
    return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
  // Decimal text is read exactly: "10.5" -> 21/2.
  auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(std::stoll(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  // cpp_int reads a leading 0 as an octal prefix.
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size()));
  BigInt scale = 1;
  for (std::size_t i = dot + 1; i < text.size(); ++i) scale *= 10;
  return Rational(BigInt(digits.empty() ? "0" : digits), scale);
}

inline std::string format_row(const CsvRow& row) {
  std::ostringstream os;
  auto real = [&](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  os << row.scheme << ',' << row.users << ',' << row.files << ',' << format_cache(row.cache) << ',' << row.selfish
     << ',' << (row.t ? std::to_string(*row.t) : "") << ',' << real(row.r) << ',' << real(row.analytic_rate) << ','
     << real(row.empirical_rate) << ',' << real(row.lower_bound) << ','
     << (row.seed ? std::to_string(*row.seed) : "") << ','
     << (row.decode_success ? (*row.decode_success ? "true" : "false") : "");
  return os.str();
}

inline void emit_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) os << format_row(r) << '\n';
}

inline std::string csv_text(const std::vector<CsvRow>& rows) {
  std::ostringstream os;
  emit_csv(os, rows);
  return os.str();
}

inline void emit_csv(const std::string& path, const std::vector<CsvRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  emit_csv(out, rows);
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

inline std::vector<CsvRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::split_fields(line).size() != 12 ||
      line.rfind(kCsvHeader, 0) != 0)
    throw ParameterError("CSV header does not match the result schema");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_fields(line);
    if (f.size() != 12) throw ParameterError("CSV row has " + std::to_string(f.size()) + " fields, expected 12");
    auto real = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    CsvRow row;
    row.scheme = f[0];
    row.users = std::stoi(f[1]);
    row.files = std::stoi(f[2]);
    row.cache = parse_cache(f[3]);
    row.selfish = std::stoi(f[4]);
    if (!f[5].empty()) row.t = std::stoi(f[5]);
    row.r = real(f[6]);
    row.analytic_rate = real(f[7]);
    row.empirical_rate = real(f[8]);
    row.lower_bound = real(f[9]);
    if (!f[10].empty()) row.seed = std::stoull(f[10]);
    if (f[11] == "true") row.decode_success = true;
    else if (f[11] == "false") row.decode_success = false;
    else if (!f[11].empty()) throw ParameterError("decode_success must be true, false or empty");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline RatePoint to_rate_point(const CsvRow& row) {
  RatePoint p;
  p.scheme = row.scheme;
  p.cache = row.cache;
  p.analytic_rate = row.analytic_rate.value_or(0.0);
  p.r_used = row.r;
  p.bound = row.lower_bound.value_or(0.0);
  return p;
}

}  // namespace d2dcache::cli
