#pragma once

#include <stdexcept>
#include <string>

namespace d2dcache {

// Root of every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

// Requested size exceeds what a fixed-width structure can address.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Fewer than k distinct coded symbols were supplied to the MDS decoder.
class InsufficientSymbolsError : public Error {
 public:
  using Error::Error;
};

// MK/N is not an integer; memory sharing is not supported.
class UnsupportedParameterError : public Error {
 public:
  using Error::Error;
};

// t >= K: every user can store the whole library.
class TrivialCachingError : public Error {
 public:
  using Error::Error;
};

// More selfish users than the deterministic scheme tolerates (S > t-1).
class ToleranceExceededError : public Error {
 public:
  using Error::Error;
};

// Aggregate (non-selfish) cache is not larger than the library.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class NoTransmitterError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace d2dcache
