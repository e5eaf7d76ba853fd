#pragma once

#include <stdexcept>
#include <string>

namespace qident {

enum class ErrorCode {
    NotComplete,
    HasZeroRows,
    AllRowsZero,
    TooLarge,
    ShapeMismatch,
    IllegalCoefficient,
    InvalidParameters,
    DimensionMismatch,
    EmptyData,
    WrongShape,
    InvalidCbar,
    InvalidGbar,
    InvalidFreeValues,
    ConstraintHolds,
    NotSubsumed,
    NoPartition,
    NotCertified,
    TooManyAttributes,
    Parse,
    Io,
};

const char* error_name(ErrorCode code);

// Domain errors map to exit code 2 in the CLI, Parse/Io to exit code 1.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }
    bool is_io() const noexcept { return code_ == ErrorCode::Parse || code_ == ErrorCode::Io; }

private:
    ErrorCode code_;
};

}  // namespace qident
