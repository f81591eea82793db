#include "platoon/errors.hpp"

namespace platoon {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::schema: return "schema";
    case ErrorCode::dangling_reference: return "dangling-reference";
    case ErrorCode::soc_bounds: return "soc-bounds";
    case ErrorCode::nonpositive_travel_time: return "nonpositive-travel-time";
    case ErrorCode::parallel_arc: return "parallel-arc";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::infeasible_deadline: return "infeasible-deadline";
    case ErrorCode::unknown_node: return "unknown-node";
    case ErrorCode::unservable: return "unservable";
    case ErrorCode::too_large: return "too-large";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace platoon
