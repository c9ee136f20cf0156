#include "matt/error.hpp"

namespace matt {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyAudio: return "EmptyAudio";
        case ErrorCode::CorruptAudio: return "CorruptAudio";
        case ErrorCode::AudioTooShort: return "AudioTooShort";
        case ErrorCode::InvalidBand: return "InvalidBand";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::EmptyFeature: return "EmptyFeature";
        case ErrorCode::BadHeader: return "BadHeader";
        case ErrorCode::BadSplit: return "BadSplit";
        case ErrorCode::DuplicateTrack: return "DuplicateTrack";
        case ErrorCode::InconsistentBagLabel: return "InconsistentBagLabel";
        case ErrorCode::InfeasibleConfig: return "InfeasibleConfig";
        case ErrorCode::MissingFeature: return "MissingFeature";
        case ErrorCode::ShapeError: return "ShapeError";
        case ErrorCode::EmptyBag: return "EmptyBag";
        case ErrorCode::DivergedError: return "DivergedError";
        case ErrorCode::EmptyEval: return "EmptyEval";
        case ErrorCode::InvalidK: return "InvalidK";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::FormatError: return "FormatError";
    }
    return "Unknown";
}

bool is_validation_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::DivergedError:
        case ErrorCode::IoError:
        case ErrorCode::AudioTooShort:
            return false;
        default:
            return true;
    }
}

}  // namespace matt
