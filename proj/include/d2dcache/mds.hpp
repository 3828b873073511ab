#pragma once

// Systematic Reed-Solomon (k, n) erasure code over GF(2^16).
//
// Coded symbol j is the evaluation at x = j of the unique polynomial of
// degree < k that takes the source values at x = 0..k-1, so symbols 0..k-1
// are the source itself and any k evaluations determine the polynomial.
// A symbol payload is a vector of little-endian 16-bit field elements and
// the code acts on each coordinate independently.

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bytes.hpp"
#include "errors.hpp"
#include "gf65536.hpp"

namespace d2dcache {

namespace detail {

// out ^= c * in, coordinate-wise on 16-bit words.
inline void gf_mul_add(Bytes& out, Gf16 c, std::span<const std::uint8_t> in) {
  if (c.is_zero()) return;
  const auto& t = Gf16Tables::instance();
  const std::uint32_t lc = t.log(c.value);
  for (std::size_t i = 0; i + 1 < in.size(); i += 2) {
    auto w = static_cast<std::uint16_t>(in[i] | (in[i + 1] << 8));
    if (w == 0) continue;
    std::uint16_t p = t.exp(lc + t.log(w));
    out[i] ^= static_cast<std::uint8_t>(p & 0xFF);
    out[i + 1] ^= static_cast<std::uint8_t>(p >> 8);
  }
}

// Barycentric weights 1 / prod_{m != i} (x_i - x_m).
inline std::vector<Gf16> barycentric_weights(const std::vector<Gf16>& points) {
  std::vector<Gf16> w(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    Gf16 prod(1);
    for (std::size_t m = 0; m < points.size(); ++m)
      if (m != i) prod *= points[i] - points[m];
    w[i] = prod.inverse();
  }
  return w;
}

// Lagrange basis values L_i(x) for x not among points.
inline std::vector<Gf16> lagrange_row(const std::vector<Gf16>& points,
                                      const std::vector<Gf16>& weights, Gf16 x) {
  Gf16 ell(1);
  for (Gf16 p : points) ell *= x - p;
  std::vector<Gf16> row(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) row[i] = weights[i] * ell / (x - points[i]);
  return row;
}

}  // namespace detail

class MdsCode {
 public:
  static constexpr int kMaxLength = 65535;

  MdsCode(int k, int n) : k_(k), n_(n) {
    if (n > kMaxLength) throw CapacityError("MDS code length " + std::to_string(n) + " exceeds 65535");
    if (k < 1 || n < k) throw ParameterError("MDS code requires 1 <= k <= n");
    source_points_.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) source_points_.emplace_back(static_cast<std::uint16_t>(i));
    source_weights_ = detail::barycentric_weights(source_points_);
  }

  int k() const { return k_; }
  int n() const { return n_; }

  // Generator row of coded symbol j: symbol_j = sum_i row[i] * source_i.
  std::vector<Gf16> coefficients(int j) const {
    if (j < 0 || j >= n_) throw ParameterError("coded symbol index out of range");
    if (j < k_) {
      std::vector<Gf16> unit(static_cast<std::size_t>(k_));
      unit[static_cast<std::size_t>(j)] = Gf16(1);
      return unit;
    }
    return detail::lagrange_row(source_points_, source_weights_,
                                Gf16(static_cast<std::uint16_t>(j)));
  }

  std::vector<Bytes> encode(std::span<const Bytes> source) const {
    if (static_cast<int>(source.size()) != k_)
      throw ParameterError("encode: expected " + std::to_string(k_) + " source symbols");
    const std::size_t width = check_width(source);
    std::vector<Bytes> coded(source.begin(), source.end());
    coded.reserve(static_cast<std::size_t>(n_));
    for (int j = k_; j < n_; ++j) {
      Bytes sym(width, 0);
      auto row = coefficients(j);
      for (int i = 0; i < k_; ++i)
        detail::gf_mul_add(sym, row[static_cast<std::size_t>(i)], source[static_cast<std::size_t>(i)]);
      coded.push_back(std::move(sym));
    }
    return coded;
  }

  // Any k distinct indices suffice; extra symbols beyond the first k (by index) are ignored.
  std::vector<Bytes> decode(const std::vector<std::pair<int, Bytes>>& received) const {
    std::map<int, const Bytes*> distinct;
    for (const auto& [idx, payload] : received) {
      if (idx < 0 || idx >= n_) throw ParameterError("decode: coded symbol index out of range");
      distinct.emplace(idx, &payload);
    }
    if (static_cast<int>(distinct.size()) < k_)
      throw InsufficientSymbolsError("decode: " + std::to_string(distinct.size()) + " distinct symbols, need " +
                                     std::to_string(k_));

    std::vector<Gf16> points;
    std::vector<const Bytes*> values;
    for (const auto& [idx, ptr] : distinct) {
      if (static_cast<int>(points.size()) == k_) break;
      points.emplace_back(static_cast<std::uint16_t>(idx));
      values.push_back(ptr);
    }
    const std::size_t width = values.front()->size();
    for (const Bytes* v : values)
      if (v->size() != width) throw ParameterError("decode: ragged symbol payloads");

    std::vector<Bytes> source(static_cast<std::size_t>(k_));
    std::vector<Gf16> weights;
    for (int i = 0; i < k_; ++i) {
      auto hit = distinct.find(i);
      if (hit != distinct.end()) {
        source[static_cast<std::size_t>(i)] = *hit->second;
        continue;
      }
      if (weights.empty()) weights = detail::barycentric_weights(points);
      auto row = detail::lagrange_row(points, weights, Gf16(static_cast<std::uint16_t>(i)));
      Bytes sym(width, 0);
      for (std::size_t r = 0; r < points.size(); ++r) detail::gf_mul_add(sym, row[r], *values[r]);
      source[static_cast<std::size_t>(i)] = std::move(sym);
    }
    return source;
  }

 private:
  static std::size_t check_width(std::span<const Bytes> symbols) {
    const std::size_t width = symbols.empty() ? 0 : symbols.front().size();
    for (const auto& s : symbols)
      if (s.size() != width) throw ParameterError("ragged symbol payloads");
    if (width % 2 != 0) throw ParameterError("symbol width must be a multiple of 2 bytes");
    return width;
  }

  int k_;
  int n_;
  std::vector<Gf16> source_points_;
  std::vector<Gf16> source_weights_;
};

inline std::vector<Bytes> mds_encode(std::span<const Bytes> source, int n) {
  return MdsCode(static_cast<int>(source.size()), n).encode(source);
}

inline std::vector<Bytes> mds_decode(const std::vector<std::pair<int, Bytes>>& received, const MdsCode& code) {
  return code.decode(received);
}

}  // namespace d2dcache
