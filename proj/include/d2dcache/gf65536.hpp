#pragma once

// GF(2^16) with the primitive polynomial x^16 + x^12 + x^3 + x + 1.
// Multiplication goes through log/antilog tables built once per process.

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>

#include "errors.hpp"

namespace d2dcache {

class Gf16Tables {
 public:
  static constexpr std::uint32_t kPolynomial = 0x1100B;
  static constexpr std::uint32_t kOrder = 65535;  // size of the multiplicative group

  static const Gf16Tables& instance() {
    static const std::unique_ptr<Gf16Tables> tables{new Gf16Tables()};
    return *tables;
  }

  std::uint16_t exp(std::uint32_t e) const { return exp_[e]; }
  std::uint32_t log(std::uint16_t a) const { return log_[a]; }

 private:
  Gf16Tables() {
    std::uint32_t x = 1;
    for (std::uint32_t i = 0; i < kOrder; ++i) {
      // Generator 2 revisiting 1 early means the polynomial is not primitive.
      if (i != 0 && x == 1) throw std::logic_error("GF(2^16): polynomial is not primitive");
      exp_[i] = static_cast<std::uint16_t>(x);
      log_[x] = i;
      x <<= 1;
      if (x & 0x10000u) x ^= kPolynomial;
    }
    // Doubled so exp(log a + log b) needs no reduction.
    for (std::uint32_t i = kOrder; i < exp_.size(); ++i) exp_[i] = exp_[i - kOrder];
    log_[0] = 0;
  }

  std::array<std::uint16_t, 2 * kOrder> exp_{};
  std::array<std::uint32_t, kOrder + 1> log_{};
};

// One element of GF(2^16).
struct Gf16 {
  std::uint16_t value = 0;

  constexpr Gf16() = default;
  constexpr explicit Gf16(std::uint16_t v) : value(v) {}

  bool is_zero() const { return value == 0; }

  friend constexpr bool operator==(Gf16, Gf16) = default;

  friend Gf16 operator+(Gf16 a, Gf16 b) { return Gf16(a.value ^ b.value); }
  friend Gf16 operator-(Gf16 a, Gf16 b) { return Gf16(a.value ^ b.value); }
  Gf16& operator+=(Gf16 o) {
    value ^= o.value;
    return *this;
  }

  friend Gf16 operator*(Gf16 a, Gf16 b) {
    if (a.value == 0 || b.value == 0) return Gf16{};
    const auto& t = Gf16Tables::instance();
    return Gf16(t.exp(t.log(a.value) + t.log(b.value)));
  }
  Gf16& operator*=(Gf16 o) { return *this = *this * o; }

  Gf16 inverse() const {
    if (value == 0) throw ParameterError("GF(2^16): zero has no inverse");
    const auto& t = Gf16Tables::instance();
    return Gf16(t.exp((Gf16Tables::kOrder - t.log(value)) % Gf16Tables::kOrder));
  }

  friend Gf16 operator/(Gf16 a, Gf16 b) { return a * b.inverse(); }
};

}  // namespace d2dcache
