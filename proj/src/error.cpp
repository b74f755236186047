#include "kgprompt/error.hpp"

namespace kgprompt {

std::string_view error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io: return "IoError";
        case ErrorKind::MalformedFile: return "MalformedFile";
        case ErrorKind::DanglingReference: return "DanglingReference";
        case ErrorKind::EmptyCategory: return "EmptyCategory";
        case ErrorKind::UnknownCategory: return "UnknownCategory";
        case ErrorKind::DuplicateEntry: return "DuplicateEntry";
        case ErrorKind::InvalidEntity: return "InvalidEntity";
        case ErrorKind::CategoryMismatch: return "CategoryMismatch";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::IndivisibleGrid: return "IndivisibleGrid";
        case ErrorKind::Config: return "ConfigError";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Network: return "NetworkError";
        case ErrorKind::UnparseableResponse: return "UnparseableResponse";
        case ErrorKind::EmptyResponse: return "EmptyResponse";
        case ErrorKind::EncoderFailure: return "EncoderFailure";
        case ErrorKind::BackendUnavailable: return "BackendUnavailable";
        case ErrorKind::NonPositiveTemperature: return "NonPositiveTemperature";
        case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
        case ErrorKind::NonFiniteUpdate: return "NonFiniteUpdate";
        case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorKind::EmptyClass: return "EmptyClass";
        case ErrorKind::UnreachableOperatingPoint: return "UnreachableOperatingPoint";
        case ErrorKind::TooFewSubjects: return "TooFewSubjects";
    }
    return "Error";
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io:
            return 1;
        case ErrorKind::MalformedFile:
        case ErrorKind::DanglingReference:
        case ErrorKind::EmptyCategory:
        case ErrorKind::UnknownCategory:
        case ErrorKind::DuplicateEntry:
        case ErrorKind::InvalidEntity:
        case ErrorKind::CategoryMismatch:
        case ErrorKind::DimensionMismatch:
        case ErrorKind::IndivisibleGrid:
        case ErrorKind::Config:
        case ErrorKind::InvalidArgument:
            return 2;
        default:
            return 3;
    }
}

}  // namespace kgprompt
