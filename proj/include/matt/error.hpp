#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace matt {

enum class ErrorCode {
    // audio / dsp
    EmptyAudio,
    CorruptAudio,
    AudioTooShort,
    InvalidBand,
    InvalidConfig,
    EmptyFeature,
    // dataset
    BadHeader,
    BadSplit,
    DuplicateTrack,
    InconsistentBagLabel,
    InfeasibleConfig,
    MissingFeature,
    // numeric / model / training
    ShapeError,
    EmptyBag,
    DivergedError,
    // evaluation
    EmptyEval,
    InvalidK,
    // plumbing
    IoError,
    FormatError,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by bad inputs or configuration (CLI exit code 1);
/// false for failures that happen while doing valid work (exit code 2).
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace matt
