#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "errors.hpp"

namespace d2dcache {

using Bytes = std::vector<std::uint8_t>;

// dst ^= src, growing dst with zeros when src is longer.
inline void xor_into(Bytes& dst, std::span<const std::uint8_t> src) {
  if (dst.size() < src.size()) dst.resize(src.size(), 0);
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] ^= src[i];
}

// XOR of all blocks, each zero-padded to the longest one.
inline Bytes xor_zero_pad(std::span<const Bytes> blocks) {
  if (blocks.empty()) throw ParameterError("xor_zero_pad: empty block list");
  std::size_t width = 0;
  for (const auto& b : blocks) width = std::max(width, b.size());
  Bytes out(width, 0);
  for (const auto& b : blocks) xor_into(out, b);
  return out;
}

}  // namespace d2dcache
