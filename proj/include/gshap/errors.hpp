#pragma once

#include <stdexcept>
#include <string>

namespace gshap {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: partitions, model specs, dimension mismatches.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Player count beyond what a 64-bit coalition mask can hold, or beyond the
/// configured exact-enumeration cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Linear-algebra failure: non-PD covariance, singular conditioning block,
/// degenerate standardization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A method whose preconditions (separability, group independence) do not
/// hold for the given inputs.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace gshap
