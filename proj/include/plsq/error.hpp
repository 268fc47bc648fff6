#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plsq {

/// Machine-readable failure categories shared by every module. The service
/// layer maps these onto HTTP status codes and the `code` field of error
/// bodies, so the string spellings are part of the wire contract.
enum class ErrorCode {
    parse_error,
    validation_error,
    syntax_error,
    resolution_error,
    unsupported_construct,
    execution_error,
    no_valid_candidates,
    empty_result_set,
    undo_at_root,
    unknown_variable,
    invalid_selection,
    not_found,
    version_conflict,
    bad_request,
    network_error,
    comparator_unavailable,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Syntax errors carry the byte offset into the statement where lexing or
/// parsing gave up.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& message)
        : Error(ErrorCode::syntax_error,
                "syntax error at offset " + std::to_string(position) + ": " + message),
          position_(position) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace plsq
