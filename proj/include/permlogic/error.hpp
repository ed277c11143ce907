#ifndef PERMLOGIC_ERROR_HPP_
#define PERMLOGIC_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace permlogic {

enum class ErrorCode {
  kInvalidDefinition,
  kPatternTooLong,
  kCharOutsideCharset,
  kWildcardNotAllowed,
  kEnumValueUnknown,
  kInvalidDecision,
  kArityMismatch,
  kTypeMismatch,
  kUnknownComponentPath,
  kDomainTooLarge,
  kStateBudgetExceeded,
  kSolverSpawnFailure,
  kModelParseError,
  kUnsupportedComponent,
  kMalformedPermSpec,
  kSchemaError,
  kUnknownPolicyType,
  kUnknownFamily,
  kInvalidUtf8,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code-name prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace permlogic

#endif  // PERMLOGIC_ERROR_HPP_
