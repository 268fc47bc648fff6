#include "plsq/error.hpp"

namespace plsq {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::parse_error: return "PARSE_ERROR";
        case ErrorCode::validation_error: return "VALIDATION_ERROR";
        case ErrorCode::syntax_error: return "SYNTAX_ERROR";
        case ErrorCode::resolution_error: return "RESOLUTION_ERROR";
        case ErrorCode::unsupported_construct: return "UNSUPPORTED_CONSTRUCT";
        case ErrorCode::execution_error: return "EXECUTION_ERROR";
        case ErrorCode::no_valid_candidates: return "NO_VALID_CANDIDATES";
        case ErrorCode::empty_result_set: return "EMPTY_RESULT_SET";
        case ErrorCode::undo_at_root: return "UNDO_AT_ROOT";
        case ErrorCode::unknown_variable: return "UNKNOWN_VARIABLE";
        case ErrorCode::invalid_selection: return "INVALID_SELECTION";
        case ErrorCode::not_found: return "NOT_FOUND";
        case ErrorCode::version_conflict: return "VERSION_CONFLICT";
        case ErrorCode::bad_request: return "BAD_REQUEST";
        case ErrorCode::network_error: return "NETWORK_ERROR";
        case ErrorCode::comparator_unavailable: return "COMPARATOR_UNAVAILABLE";
    }
    return "UNKNOWN";
}

}  // namespace plsq
