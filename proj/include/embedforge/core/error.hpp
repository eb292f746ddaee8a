#pragma once

#include <stdexcept>
#include <string>

namespace embedforge {

// Domain error kinds surfaced by the pipeline. The CLI maps these to exit
// code 1; anything else escaping is a bug.
enum class ErrorKind {
    FileMissing,
    SchemaViolation,
    DanglingReference,
    DimensionMismatch,
    CorruptHeader,
    EmptyInput,
    TransportError,
    SchemaError,
    BudgetExceeded,
    ScoreOutOfRange,
    PositiveMissing,
    EmptyEligible,
    NonFiniteSimilarity,
    EmptyText,
    DivergenceDetected,
    TargetTooSmall,
    UnknownSpecial,
    InvalidCounts,
    MissingEmbedding,
    DegenerateLabels,
    LabelMissingInTrain,
    DegenerateGold,
    EmptyReport,
    MissingParameter,
    ConfigError,
    UsageError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
          kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace embedforge
