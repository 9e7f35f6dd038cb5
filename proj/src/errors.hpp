#pragma once

#include <stdexcept>
#include <string>

namespace velmat {

/// Coarse failure class. Values double as process exit codes and C API
/// status codes, so keep them in sync with include/velmat/velmat.h.
enum class ErrorCode : int {
  invalid_argument = 1,
  scenario = 2,   // bad input: scenario file, expression, coefficient data
  numerical = 3,  // well-formed input whose numerics broke down
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Point outside the domain, or a scalar function evaluated outside its
/// mathematical domain (log of a negative, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::scenario, what) {}
};

/// Coefficient data that violates a structural requirement (Hermiticity,
/// positivity, stiffness symmetry).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorCode::scenario, what) {}
};

class ScenarioError : public Error {
 public:
  explicit ScenarioError(const std::string& what) : Error(ErrorCode::scenario, what) {}
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& what) : Error(ErrorCode::invalid_argument, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorCode::numerical, what) {}
};

}  // namespace velmat
