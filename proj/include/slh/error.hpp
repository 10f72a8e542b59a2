#pragma once

#include <stdexcept>
#include <string>

namespace slh {

enum class ErrorCode {
    // usage / configuration
    ConfigInvalid,
    SpecInvalid,
    InvalidH,
    LengthUnsupported,
    GridMismatch,
    // data
    FileNotFound,
    ParseError,
    TooShort,
    TauOutOfRange,
    EmptySeries,
    GridTooLarge,
    NonpositiveMoment,
    IoError,
    // degeneracy
    DegenerateRange,
    DegenerateDenominator,
    MonofractalDegenerate,
    InsufficientPoints,
    DegenerateSlope,
    AllPairsDegenerate,
    BetaOutOfRange,
};

enum class ErrorCategory { Usage = 1, Data = 2, Degenerate = 3 };

const char* code_name(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

// Malformed input row; row is 1-based and counts every physical line.
class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& reason);
    std::size_t row() const noexcept { return row_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t row_;
    std::string reason_;
};

// An Error raised inside a named pipeline stage.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& inner);
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace slh
