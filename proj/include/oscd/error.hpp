#pragma once

// Error taxonomy shared by the library and the CLI. Each class maps to a
// distinct process exit code so scripted pipelines can branch on failure kind.

#include <stdexcept>
#include <string>

namespace oscd {

enum class ErrorCode {
    generic = 1,
    parse_error = 2,
    duplicate_id = 3,
    dimension_mismatch = 4,
    missing_field = 5,
    invalid_value = 6,
    disjointness_violation = 7,
    insufficient_data = 8,
    unsupported_spec = 9,
    infeasible_strategy = 10,
    missing_input = 11,
    degenerate_input = 12,
    config_error = 13,
    io_error = 14,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace oscd
