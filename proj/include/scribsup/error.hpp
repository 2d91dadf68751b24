#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scribsup {

enum class ErrorCode {
  MalformedHeader,
  UnsupportedDatatype,
  TruncatedData,
  IoFailure,
  KTooLarge,
  EmptyForeground,
  ShapeMismatch,
  NoConfidentVoxels,
  InvalidConfig,
  BadPatchShape,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 protected:
  struct Verbatim {};
  Error(ErrorCode code, const std::string& message, Verbatim) : std::runtime_error(message), code_(code) {}

 private:
  ErrorCode code_;
};

}  // namespace scribsup
