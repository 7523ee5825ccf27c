#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lwoct {

enum class ErrorCode {
    BadMagic,
    TruncatedFile,
    InconsistentHeader,
    MissingSlice,
    DimensionMismatch,
    IoFailure,
    InvalidConfig,
    InvalidBand,
    InvalidArgument,
    OutOfBounds,
    NoPath,
    DuplicateAnchorColumn,
    DegenerateLoop,
    InsufficientAnchors,
    NothingToUndo,
    TooFewClicks,
    LengthMismatch,
    BothEmpty,
    DegenerateSegment,
    AllColumnsFlagged,
    InvalidSpec,
    ScanMismatch,
    InvalidMode,
    NoVolume,
    UnknownVerb,
    BadRequest,
};

/// Stable snake_case name, used as the protocol error code.
constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::BadMagic: return "bad_magic";
    case ErrorCode::TruncatedFile: return "truncated_file";
    case ErrorCode::InconsistentHeader: return "inconsistent_header";
    case ErrorCode::MissingSlice: return "missing_slice";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::IoFailure: return "io_failure";
    case ErrorCode::InvalidConfig: return "invalid_config";
    case ErrorCode::InvalidBand: return "invalid_band";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::OutOfBounds: return "out_of_bounds";
    case ErrorCode::NoPath: return "no_path";
    case ErrorCode::DuplicateAnchorColumn: return "duplicate_anchor_column";
    case ErrorCode::DegenerateLoop: return "degenerate_loop";
    case ErrorCode::InsufficientAnchors: return "insufficient_anchors";
    case ErrorCode::NothingToUndo: return "nothing_to_undo";
    case ErrorCode::TooFewClicks: return "too_few_clicks";
    case ErrorCode::LengthMismatch: return "length_mismatch";
    case ErrorCode::BothEmpty: return "both_empty";
    case ErrorCode::DegenerateSegment: return "degenerate_segment";
    case ErrorCode::AllColumnsFlagged: return "all_columns_flagged";
    case ErrorCode::InvalidSpec: return "invalid_spec";
    case ErrorCode::ScanMismatch: return "scan_mismatch";
    case ErrorCode::InvalidMode: return "invalid_mode";
    case ErrorCode::NoVolume: return "no_volume";
    case ErrorCode::UnknownVerb: return "unknown_verb";
    case ErrorCode::BadRequest: return "bad_request";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace lwoct
