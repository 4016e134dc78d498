#pragma once
#include <stdexcept>
#include <string>

namespace spinlab {

enum class ErrorKind {
  InvalidParams,
  MalformedInput,
  CapExceeded,
  ZeroPartition,
  DegenerateRow,
  NotDivisible,
  Disconnected,
  HardConstraintInfeasible,
  NoBracket,
  RegimeInapplicable,
  OutOfImage,
  OutsideUniqueness,
  InvalidThreshold,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace spinlab
