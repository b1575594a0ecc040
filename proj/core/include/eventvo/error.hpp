#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eventvo {

enum class ErrorCode {
  kParse,
  kValidation,
  kPrecondition,
  kIo,
  kConfig,
  kGeometry,
  kDegenerate,
  kUnderdetermined,
};

const char* to_string(ErrorCode code);

// Every error raised by the library carries the module that produced it, so
// the CLI can print provenance without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message,
        std::size_t line = 0);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  // 1-based input line for parse/validation errors, 0 when not applicable.
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::size_t line_;
};

}  // namespace eventvo
