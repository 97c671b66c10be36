#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fastmix {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: length mismatches, out-of-range sites, negative λ.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A brute-force routine was asked to enumerate more states than it allows.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A mixing-time bound is vacuous for the requested parameters.
class NoCertificateError : public Error {
 public:
  using Error::Error;
};

/// A request that only makes sense in the other optimisation mode.
class ModeError : public Error {
 public:
  using Error::Error;
};

/// Logarithms in a closed-form bound left their domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A NaN or infinity appeared during training.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::int64_t iteration)
      : Error(what + " at iteration " + std::to_string(iteration)), iteration_(iteration) {}

  std::int64_t iteration() const noexcept { return iteration_; }

 private:
  std::int64_t iteration_;
};

}  // namespace fastmix
