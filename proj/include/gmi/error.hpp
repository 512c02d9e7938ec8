#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gmi {

enum class ErrorCode {
  NegativeMass,
  MassNotNormalized,
  DuplicateLabel,
  DuplicateCell,
  BadParameter,
  TailBoundStalls,
  DegenerateOrder,
  UncertifiedTail,
  NumericViolation,
  NoCollisions,
  EmptyTable,
  Cancelled,
  ParseError,
};

std::string_view error_name(ErrorCode code) noexcept;

// %.10g, for messages.
std::string format_real(double v);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gmi
