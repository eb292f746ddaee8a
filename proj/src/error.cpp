#include "embedforge/core/error.hpp"

namespace embedforge {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::FileMissing: return "FileMissing";
        case ErrorKind::SchemaViolation: return "SchemaViolation";
        case ErrorKind::DanglingReference: return "DanglingReference";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::CorruptHeader: return "CorruptHeader";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::TransportError: return "TransportError";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::BudgetExceeded: return "BudgetExceeded";
        case ErrorKind::ScoreOutOfRange: return "ScoreOutOfRange";
        case ErrorKind::PositiveMissing: return "PositiveMissing";
        case ErrorKind::EmptyEligible: return "EmptyEligible";
        case ErrorKind::NonFiniteSimilarity: return "NonFiniteSimilarity";
        case ErrorKind::EmptyText: return "EmptyText";
        case ErrorKind::DivergenceDetected: return "DivergenceDetected";
        case ErrorKind::TargetTooSmall: return "TargetTooSmall";
        case ErrorKind::UnknownSpecial: return "UnknownSpecial";
        case ErrorKind::InvalidCounts: return "InvalidCounts";
        case ErrorKind::MissingEmbedding: return "MissingEmbedding";
        case ErrorKind::DegenerateLabels: return "DegenerateLabels";
        case ErrorKind::LabelMissingInTrain: return "LabelMissingInTrain";
        case ErrorKind::DegenerateGold: return "DegenerateGold";
        case ErrorKind::EmptyReport: return "EmptyReport";
        case ErrorKind::MissingParameter: return "MissingParameter";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::UsageError: return "UsageError";
    }
    return "UnknownError";
}

}  // namespace embedforge
