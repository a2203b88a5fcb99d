#pragma once

#include <stdexcept>
#include <string>

namespace bfbin {

/// Base class for everything the library throws on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain (negative shape, count > n, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Inconsistent or incomplete configuration (missing priors, bad range).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Quadrature ran out of subdivisions. Carries what it had so far.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double best, double err)
      : Error(what), best_estimate(best), error_estimate(err) {}
  double best_estimate;
  double error_estimate;
};

}  // namespace bfbin
