#include "hetdiag/errors.hpp"

namespace hetdiag {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::schema: return "E_SCHEMA";
    case ErrorCode::treatment_not_binary: return "E_TREATMENT_NOT_BINARY";
    case ErrorCode::degenerate_group: return "E_DEGENERATE_GROUP";
    case ErrorCode::rank_deficient: return "E_RANK_DEFICIENT";
    case ErrorCode::nonpositive_weight: return "E_NONPOSITIVE_WEIGHT";
    case ErrorCode::assumption2: return "E_ASSUMPTION2";
    case ErrorCode::identity_broken: return "E_IDENTITY_BROKEN";
    case ErrorCode::no_variation: return "E_NO_VARIATION";
    case ErrorCode::bad_config: return "E_BAD_CONFIG";
    case ErrorCode::too_many_failures: return "E_TOO_MANY_FAILURES";
  }
  return "E_UNKNOWN";
}

}  // namespace hetdiag
