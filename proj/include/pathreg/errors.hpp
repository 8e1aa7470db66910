#pragma once

#include <stdexcept>
#include <string>

namespace pathreg {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation is not defined for the given process family.
class UnsupportedSpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Factorization, root finding or iteration failed to deliver a result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rate fit could not be carried out (too few points, collinear design).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Monte Carlo curve without a single usable entry.
class EmptyCurveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pathreg
