// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hiergen {

enum class ErrorCode {
    DuplicateIdConflict,
    UnknownNode,
    UnknownClass,
    CycleRejected,
    InvalidEdge,
    ContextOverflow,
    ProviderUnavailable,
    Truncated,
    UnparseableOutput,
    IllegalCategory,
    StaleDelta,
    UnsupportedVersion,
    CorruptSnapshot,
    ClassMismatch,
    NoOutcomes,
    PreconditionFailed,
    SchemaError,
    ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every recoverable failure in the library is reported through this type.
/// `code()` is stable and is what callers (and the CLI exit-code mapping)
/// switch on; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DuplicateIdConflict: return "DuplicateIdConflict";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::CycleRejected: return "CycleRejected";
    case ErrorCode::InvalidEdge: return "InvalidEdge";
    case ErrorCode::ContextOverflow: return "ContextOverflow";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::UnparseableOutput: return "UnparseableOutput";
    case ErrorCode::IllegalCategory: return "IllegalCategory";
    case ErrorCode::StaleDelta: return "StaleDelta";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::CorruptSnapshot: return "CorruptSnapshot";
    case ErrorCode::ClassMismatch: return "ClassMismatch";
    case ErrorCode::NoOutcomes: return "NoOutcomes";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

} // namespace hiergen
