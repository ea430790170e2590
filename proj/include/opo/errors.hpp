#pragma once

#include <stdexcept>
#include <string>

namespace opo {

// Base for every error raised by the library. The CLI maps ConfigError to
// exit code 2 and every other Error to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed argument: wrong size, out-of-range parameter, empty record...
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A partial covariance lacks an entry the requested quantity needs.
class MissingEntry : public Error {
 public:
  explicit MissingEntry(std::string entry)
      : Error("covariance entry " + entry + " is not determined"), entry_(std::move(entry)) {}
  const std::string& entry() const noexcept { return entry_; }

 private:
  std::string entry_;
};

// Covariance violates the uncertainty principle.
class NonPhysical : public Error {
 public:
  NonPhysical(const std::string& what, double worst_eigenvalue)
      : Error(what), worst_eigenvalue_(worst_eigenvalue) {}
  double worst_eigenvalue() const noexcept { return worst_eigenvalue_; }

 private:
  double worst_eigenvalue_;
};

// Over-determined reconstruction whose terms disagree.
class InconsistentMeasurements : public Error {
 public:
  using Error::Error;
};

// Quadratic minimisation with a zero-variance correction quadrature.
class DegenerateMinimization : public Error {
 public:
  using Error::Error;
};

// Operating point outside the above-threshold regime.
class BelowThreshold : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace opo
