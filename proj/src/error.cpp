#include "matfactor/error.hpp"

namespace matfactor {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kStructural: return "structural error";
    case ErrorCode::kSchema: return "schema error";
    case ErrorCode::kDomain: return "domain error";
    case ErrorCode::kNumeric: return "numeric error";
    case ErrorCode::kDegeneracy: return "degeneracy error";
    case ErrorCode::kCollinearity: return "collinearity error";
    case ErrorCode::kContract: return "contract error";
    case ErrorCode::kDimensionality: return "dimensionality error";
    case ErrorCode::kIo: return "i/o error";
  }
  return "error";
}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

}  // namespace matfactor
