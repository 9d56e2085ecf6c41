#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smcf {

/// Base of every error raised by the library. The C API maps each subclass to
/// one status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A node (or input) left the spacelike cone: the largest eigenvalue of
/// Du Du^T reached 1 - kSpacelikeGuard.
class SpacelikeViolation : public Error {
 public:
  SpacelikeViolation(const std::string& what, double max_eigenvalue, std::ptrdiff_t node = -1)
      : Error(what), max_eigenvalue_(max_eigenvalue), node_(node) {}
  double max_eigenvalue() const noexcept { return max_eigenvalue_; }
  std::ptrdiff_t node() const noexcept { return node_; }

 private:
  double max_eigenvalue_;
  std::ptrdiff_t node_;
};

class NumericalBlowup : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace smcf
