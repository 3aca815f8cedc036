#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace biosketch {

enum class Errc {
  UnsupportedM,
  NonPrimitivePolynomial,
  FieldMismatch,
  DivisionByZero,
  InvalidK,
  LengthMismatch,
  BudgetExceeded,
  InvalidParams,
  DimensionMismatch,
  ParseError,
  InsufficientData,
  GTooLarge,
  IndexOutOfRange,
  EnrollmentDecodeFailure,
  ParameterMismatch,
  NotFound,
  IoError,
  DuplicateSubject,
  InconsistentDimensions,
  SecurityTooHigh,
};

constexpr std::string_view to_string(Errc e) noexcept {
  switch (e) {
    case Errc::UnsupportedM: return "UnsupportedM";
    case Errc::NonPrimitivePolynomial: return "NonPrimitivePolynomial";
    case Errc::FieldMismatch: return "FieldMismatch";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::InvalidK: return "InvalidK";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::GTooLarge: return "GTooLarge";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::EnrollmentDecodeFailure: return "EnrollmentDecodeFailure";
    case Errc::ParameterMismatch: return "ParameterMismatch";
    case Errc::NotFound: return "NotFound";
    case Errc::IoError: return "IoError";
    case Errc::DuplicateSubject: return "DuplicateSubject";
    case Errc::InconsistentDimensions: return "InconsistentDimensions";
    case Errc::SecurityTooHigh: return "SecurityTooHigh";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the Errc codes so
/// callers (and the CLI's exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace biosketch
