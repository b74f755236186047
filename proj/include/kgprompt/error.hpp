#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kgprompt {

enum class ErrorKind {
    // I/O
    Io,
    // validation
    MalformedFile,
    DanglingReference,
    EmptyCategory,
    UnknownCategory,
    DuplicateEntry,
    InvalidEntity,
    CategoryMismatch,
    DimensionMismatch,
    IndivisibleGrid,
    Config,
    InvalidArgument,
    // runtime
    Network,
    UnparseableResponse,
    EmptyResponse,
    EncoderFailure,
    BackendUnavailable,
    NonPositiveTemperature,
    NonFiniteGradient,
    NonFiniteUpdate,
    NonFiniteLoss,
    EmptyClass,
    UnreachableOperatingPoint,
    TooFewSubjects,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

std::string_view error_kind_name(ErrorKind kind);

// Process exit status for a failure of this kind: 1 I/O, 2 validation, 3 runtime.
int exit_code(ErrorKind kind);

}  // namespace kgprompt
