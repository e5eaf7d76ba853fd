#include "qident/error.hpp"

namespace qident {

const char* error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotComplete: return "NotComplete";
        case ErrorCode::HasZeroRows: return "HasZeroRows";
        case ErrorCode::AllRowsZero: return "AllRowsZero";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::IllegalCoefficient: return "IllegalCoefficient";
        case ErrorCode::InvalidParameters: return "InvalidParameters";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyData: return "EmptyData";
        case ErrorCode::WrongShape: return "WrongShape";
        case ErrorCode::InvalidCbar: return "InvalidCbar";
        case ErrorCode::InvalidGbar: return "InvalidGbar";
        case ErrorCode::InvalidFreeValues: return "InvalidFreeValues";
        case ErrorCode::ConstraintHolds: return "ConstraintHolds";
        case ErrorCode::NotSubsumed: return "NotSubsumed";
        case ErrorCode::NoPartition: return "NoPartition";
        case ErrorCode::NotCertified: return "NotCertified";
        case ErrorCode::TooManyAttributes: return "TooManyAttributes";
        case ErrorCode::Parse: return "ParseError";
        case ErrorCode::Io: return "IoError";
    }
    return "Error";
}

}  // namespace qident
