#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vdf {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated an argument contract (bad vertex id, slot out of range, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class ValidationKind { asymmetry, degree, multi_edge, self_loop, range };

inline const char* to_string(ValidationKind kind) {
  switch (kind) {
    case ValidationKind::asymmetry: return "asymmetry";
    case ValidationKind::degree: return "degree";
    case ValidationKind::multi_edge: return "multi-edge";
    case ValidationKind::self_loop: return "self-loop";
    case ValidationKind::range: return "range";
  }
  return "unknown";
}

class ValidationError : public Error {
 public:
  ValidationError(ValidationKind kind, const std::string& what)
      : Error(std::string("validation failed (") + to_string(kind) + "): " + what),
        kind_(kind) {}

  ValidationKind kind() const { return kind_; }

 private:
  ValidationKind kind_;
};

// Instance-family request that cannot be realized.
class SpecError : public Error {
 public:
  using Error::Error;
};

// Distribution with no mass left, or a sampler that cannot make progress.
class DegenerateDistribution : public Error {
 public:
  using Error::Error;
};

class EstimateOverflow : public Error {
 public:
  using Error::Error;
};

// No vertex carries start probability (all mass sits on isolated vertices).
class NoStartVertex : public Error {
 public:
  using Error::Error;
};

// A query argument was never revealed by a prior oracle answer.
class LocalityViolation : public Error {
 public:
  using Error::Error;
};

// Brute-force oracle refused an instance above its size cap.
class CapError : public Error {
 public:
  using Error::Error;
};

// Mental multigraph scale too small for meaningful multiplicities.
class ScaleError : public Error {
 public:
  using Error::Error;
};

}  // namespace vdf
