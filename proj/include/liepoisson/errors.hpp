#pragma once

#include <stdexcept>
#include <string>

namespace lp {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch, malformed sample grid, bad argument.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Structure functions that are not antisymmetric in the lower indices.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// Bundle metric that is not symmetric positive-definite.
class MetricError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point or Newton iteration that did not converge.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Fiber derivative is singular or its inversion failed.
class HyperregularityError : public Error {
 public:
  using Error::Error;
};

/// TQ-connection is not compatible with a bundle metric.
class IncompatibilityError : public Error {
 public:
  IncompatibilityError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Syntax error in an expression, with the 0-based character offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace lp
