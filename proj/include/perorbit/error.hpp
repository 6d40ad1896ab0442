#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace perorbit {

/// Base class of every error raised by the library. The message is prefixed
/// with the module and operation that raised it, e.g. "dichotomy/spectral_split: ...".
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string operation, const std::string& message)
      : std::runtime_error(module + "/" + operation + ": " + message),
        module_(std::move(module)),
        operation_(std::move(operation)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string module_;
  std::string operation_;
};

/// Violated precondition or invalid input value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& message)
      : Error("sysdsl", "parse", message), offset_(offset), expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(std::size_t offset, std::string name)
      : Error("sysdsl", "parse", "unknown identifier '" + name + "' at offset " + std::to_string(offset)),
        offset_(offset),
        name_(std::move(name)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::size_t offset_;
  std::string name_;
};

/// Evaluation outside an operator's domain (sqrt of a negative, division by zero, ...).
class DomainError : public Error {
 public:
  DomainError(std::string operation, std::size_t node, std::size_t source_offset, const std::string& what)
      : Error("sysdsl", std::move(operation),
              what + " (node " + std::to_string(node) + ", source offset " + std::to_string(source_offset) + ")"),
        node_(node),
        source_offset_(source_offset) {}

  std::size_t node() const noexcept { return node_; }
  std::size_t source_offset() const noexcept { return source_offset_; }

 private:
  std::size_t node_;
  std::size_t source_offset_;
};

class IntegrationError : public Error {
 public:
  enum class Kind { StepSizeUnderflow, MaxStepsExceeded, NonFiniteDerivative, OutOfBounds };

  IntegrationError(Kind kind, double time, const std::string& message)
      : Error("flow_engine", "integrate", message + " at t=" + std::to_string(time)), kind_(kind), time_(time) {}

  Kind kind() const noexcept { return kind_; }
  double time() const noexcept { return time_; }

 private:
  Kind kind_;
  double time_;
};

class ImaginaryAxisEigenvalue : public Error {
 public:
  explicit ImaginaryAxisEigenvalue(const std::string& message) : Error("dichotomy", "spectral_split", message) {}
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class ContractionViolated : public Error {
 public:
  using Error::Error;
};

class UnboundedGrowth : public Error {
 public:
  explicit UnboundedGrowth(const std::string& message) : Error("dichotomy", "growth_bounds", message) {}
};

class ContourNotFound : public Error {
 public:
  explicit ContourNotFound(const std::string& message) : Error("degree", "sample_boundary", message) {}
};

class ZeroOnBoundary : public Error {
 public:
  ZeroOnBoundary(double magnitude, const std::string& message)
      : Error("degree", "brouwer_degree", message), magnitude_(magnitude) {}

  double magnitude() const noexcept { return magnitude_; }

 private:
  double magnitude_;
};

class NonConvergent : public Error {
 public:
  using Error::Error;
};

class NoZeroFound : public Error {
 public:
  explicit NoZeroFound(const std::string& message) : Error("orbit_solver", "averaged_zero", message) {}
};

class MaxIterations : public Error {
 public:
  using Error::Error;
};

class DivergedOutsideDomain : public Error {
 public:
  explicit DivergedOutsideDomain(const std::string& message) : Error("orbit_solver", "shoot", message) {}
};

}  // namespace perorbit
