#include "slh/error.hpp"

namespace slh {

const char* code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::InvalidH: return "InvalidH";
    case ErrorCode::LengthUnsupported: return "LengthUnsupported";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::TauOutOfRange: return "TauOutOfRange";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::NonpositiveMoment: return "NonpositiveMoment";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::MonofractalDegenerate: return "MonofractalDegenerate";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::DegenerateSlope: return "DegenerateSlope";
    case ErrorCode::AllPairsDegenerate: return "AllPairsDegenerate";
    case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
    switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::SpecInvalid:
    case ErrorCode::InvalidH:
    case ErrorCode::LengthUnsupported:
    case ErrorCode::GridMismatch:
        return ErrorCategory::Usage;
    case ErrorCode::FileNotFound:
    case ErrorCode::ParseError:
    case ErrorCode::TooShort:
    case ErrorCode::TauOutOfRange:
    case ErrorCode::EmptySeries:
    case ErrorCode::GridTooLarge:
    case ErrorCode::NonpositiveMoment:
    case ErrorCode::IoError:
        return ErrorCategory::Data;
    default:
        return ErrorCategory::Degenerate;
    }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(code_name(code)) + ": " + message), code_(code), detail_(message) {}

ParseError::ParseError(std::size_t row, const std::string& reason)
    : Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": " + reason), row_(row), reason_(reason) {}

StageError::StageError(std::string stage, const Error& inner)
    : Error(inner.code(), "[" + stage + "] " + inner.detail()), stage_(std::move(stage)) {}

} // namespace slh
