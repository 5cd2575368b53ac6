#pragma once

#include <stdexcept>
#include <string>

namespace smalldev {

/// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorKind {
  usage,      // bad arguments or invalid configuration
  numerical,  // quadrature, factorization or iteration failure
  domain      // precondition of an operation violated
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

/// Raised when a covariance matrix is singular to working precision and
/// sequential conditioning cannot proceed; callers should switch to the
/// finite-rank reduction for purely atomic measures.
class DegenerateCovariance : public NumericalError {
 public:
  explicit DegenerateCovariance(const std::string& what) : NumericalError(what) {}
};

}  // namespace smalldev
