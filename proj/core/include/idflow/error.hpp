#pragma once

#include <stdexcept>
#include <string>

namespace idflow {

enum class ErrorKind {
  Format,      // malformed file magic/header/layout
  Validation,  // record-level constraint violated (bad coordinate, polarity, ...)
  Shape,       // tensor/field dimension mismatch
  Domain,      // argument outside the mathematical domain of the operation
  Contract,    // caller broke an API precondition
  Io,          // filesystem failure
  Numeric,     // NaN/Inf escaped a computation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  // CLI exit-code convention: 3 for data/contract problems, 4 for numeric failures.
  int exit_code() const { return kind_ == ErrorKind::Numeric ? 4 : 3; }

 private:
  ErrorKind kind_;
};

// Thrown for bad flags / config keys; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace idflow
