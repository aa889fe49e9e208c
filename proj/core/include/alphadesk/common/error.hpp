#pragma once

#include <stdexcept>
#include <string>

namespace alphadesk {

/// Error categories map 1:1 onto CLI exit codes:
///   1 = bad input data or configuration, 2 = domain failure
///   (dependency cycle, infeasible program), 3 = broken internal invariant.
enum class ErrorKind { config = 1, data = 1, domain = 2, internal = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorKind::config, m) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& m) : Error(ErrorKind::data, m) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& m) : Error(ErrorKind::domain, m) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& m) : Error(ErrorKind::internal, m) {}
};

}  // namespace alphadesk
