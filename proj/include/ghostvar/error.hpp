#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ghostvar {

enum class ErrorCode {
    RankDeficient,
    DimensionMismatch,
    NotSymmetric,
    NoConvergence,
    InvalidProbability,
    NotPositiveSemiDefinite,
    NonFinite,
    SpawnFailed,
    ProtocolViolation,
    Timeout,
    SchemaMismatch,
    RefitFailed,
    ZeroRelevanceVariable,
    DegenerateSimilarity,
    ParseError,
    MissingResponseColumn,
    EmptyFile,
    TooFewRows,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::InvalidProbability: return "InvalidProbability";
        case ErrorCode::NotPositiveSemiDefinite: return "NotPositiveSemiDefinite";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::SpawnFailed: return "SpawnFailed";
        case ErrorCode::ProtocolViolation: return "ProtocolViolation";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::RefitFailed: return "RefitFailed";
        case ErrorCode::ZeroRelevanceVariable: return "ZeroRelevanceVariable";
        case ErrorCode::DegenerateSimilarity: return "DegenerateSimilarity";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::MissingResponseColumn: return "MissingResponseColumn";
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Single exception type for the library; `code()` says what went wrong.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    /// what() without the code prefix.
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace ghostvar
