#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace matfactor {

// Failure classes shared by all modules. The C API maps these one-to-one onto
// mf_status values, so keep the order in sync with matfactor.h.
enum class ErrorCode {
  kParse = 1,
  kStructural,
  kSchema,
  kDomain,
  kNumeric,
  kDegeneracy,
  kCollinearity,
  kContract,
  kDimensionality,
  kIo,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failure carrying the 1-based input line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) raise(code, message);
}

}  // namespace matfactor
