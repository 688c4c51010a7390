#pragma once

#include <stdexcept>
#include <string>

namespace covplan {

enum class ErrorKind {
  DegenerateDesign,
  InsufficientData,
  RankDeficient,
  InvalidContrast,
  DomainError,
  NonConvergence,
  MissingColumn,
  InvalidData,
};

const char* to_string(ErrorKind kind);

// All library failures are reported through this one exception type; the
// kind lets the command line map numeric failures and validation failures to
// different exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace covplan
