#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topodisc {

enum class ErrorCode {
    malformed,
    unknown_resolution,
    missing_column,
    unreachable_resolution,
    resolution_mismatch,
    no_records,
    io,
    unknown_dataset,
    not_built,
    invalid_argument,
    unsupported,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace topodisc
