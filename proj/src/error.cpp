#include "lfsc/error.hpp"

namespace lfsc {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput: return "invalid-input";
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::InvalidCode: return "invalid-code";
        case ErrorCode::Shape: return "shape";
        case ErrorCode::Length: return "length";
        case ErrorCode::Format: return "format";
        case ErrorCode::Validation: return "validation";
        case ErrorCode::Truncation: return "truncation";
        case ErrorCode::Corruption: return "corruption";
        case ErrorCode::UnsupportedRate: return "unsupported-rate";
        case ErrorCode::UnsupportedLayout: return "unsupported-layout";
        case ErrorCode::UndefinedBandwidth: return "undefined-bandwidth";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

}  // namespace lfsc
