#pragma once

#include <stdexcept>
#include <string>

namespace seapose {

enum class ErrorCode {
    ParseError,
    ValidationError,
    MissingFile,
    NonPositiveDepth,
    DegenerateCameras,
    NoConsensus,
    EmptyCloud,
    AllPointsRejected,
    DegenerateAverage,
    DegenerateGeometry,
    DimensionMismatch,
    NoMaskedViews,
    IdMismatch,
    InvalidYears,
};

const char* error_code_name(ErrorCode code);

/// Every failure in the library is thrown as an Error carrying a typed code,
/// so callers can map failures to exit codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
        case ErrorCode::DegenerateCameras: return "DegenerateCameras";
        case ErrorCode::NoConsensus: return "NoConsensus";
        case ErrorCode::EmptyCloud: return "EmptyCloud";
        case ErrorCode::AllPointsRejected: return "AllPointsRejected";
        case ErrorCode::DegenerateAverage: return "DegenerateAverage";
        case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NoMaskedViews: return "NoMaskedViews";
        case ErrorCode::IdMismatch: return "IdMismatch";
        case ErrorCode::InvalidYears: return "InvalidYears";
    }
    return "UnknownError";
}

}  // namespace seapose
