#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qwt {

/// Machine-readable category carried by every library exception.
enum class ErrorCode {
  invalid_operator,
  not_positive,
  shape,
  domain,
  format,
  validation,
  no_finite_value,
  missing_label,
  expurgation_failed,
  degenerate_epsilon,
  empty_band,
  too_large,
  precondition,
  io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_operator: return "InvalidOperator";
    case ErrorCode::not_positive: return "NotPositive";
    case ErrorCode::shape: return "ShapeError";
    case ErrorCode::domain: return "DomainError";
    case ErrorCode::format: return "FormatError";
    case ErrorCode::validation: return "ValidationError";
    case ErrorCode::no_finite_value: return "NoFiniteValue";
    case ErrorCode::missing_label: return "KeyError";
    case ErrorCode::expurgation_failed: return "ExpurgationFailed";
    case ErrorCode::degenerate_epsilon: return "DegenerateEpsilon";
    case ErrorCode::empty_band: return "EmptyBand";
    case ErrorCode::too_large: return "TooLarge";
    case ErrorCode::precondition: return "PreconditionError";
    case ErrorCode::io: return "IoError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {
template <ErrorCode C>
class TypedError : public Error {
 public:
  explicit TypedError(const std::string& what) : Error(C, what) {}
};
}  // namespace detail

using InvalidOperator = detail::TypedError<ErrorCode::invalid_operator>;
using NotPositive = detail::TypedError<ErrorCode::not_positive>;
using ShapeError = detail::TypedError<ErrorCode::shape>;
using DomainError = detail::TypedError<ErrorCode::domain>;
using FormatError = detail::TypedError<ErrorCode::format>;
using ValidationError = detail::TypedError<ErrorCode::validation>;
using KeyError = detail::TypedError<ErrorCode::missing_label>;
using EmptyBand = detail::TypedError<ErrorCode::empty_band>;
using TooLarge = detail::TypedError<ErrorCode::too_large>;
using PreconditionError = detail::TypedError<ErrorCode::precondition>;
using IoError = detail::TypedError<ErrorCode::io>;

}  // namespace qwt
