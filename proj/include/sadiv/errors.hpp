#pragma once

#include <stdexcept>
#include <string>

namespace sadiv {

/// Throughput is identically zero (eps == 1), so no optimum exists.
class DegenerateChannelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested loss rate lies at or below the erasure floor eps^K.
class UnreachableTargetError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DivisionByZeroError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EnumerationTooLargeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class UnsupportedConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Gateway saw an inconsistent linear system or a coefficient outside a
/// relay's collected set. Always an encoder, merge or transport bug.
class CorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed coded-packet byte stream.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sadiv
