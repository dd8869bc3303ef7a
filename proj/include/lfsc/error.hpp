#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lfsc {

enum class ErrorCode {
    InvalidInput,
    InvalidArgument,
    InvalidCode,
    Shape,
    Length,
    Format,
    Validation,
    Truncation,
    Corruption,
    UnsupportedRate,
    UnsupportedLayout,
    UndefinedBandwidth,
    Io,
};

// Stable kebab-case name, used in CLI diagnostics.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lfsc
