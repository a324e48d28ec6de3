// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace snnk {

enum class ErrorCode {
    InvalidArgument,
    UnsupportedClosedForm,
    UnsupportedActivation,
    QuadratureNonConvergent,
    ProposalMismatch,
    LayoutMismatch,
    NotAtomic,
    ZeroVector,
    ShapeMismatch,
    SingularSystem,
    DivergenceDetected,
    ConfigError,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::UnsupportedClosedForm: return "UnsupportedClosedForm";
        case ErrorCode::UnsupportedActivation: return "UnsupportedActivation";
        case ErrorCode::QuadratureNonConvergent: return "QuadratureNonConvergent";
        case ErrorCode::ProposalMismatch: return "ProposalMismatch";
        case ErrorCode::LayoutMismatch: return "LayoutMismatch";
        case ErrorCode::NotAtomic: return "NotAtomic";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::DivergenceDetected: return "DivergenceDetected";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

// All library failures are reported through this one exception type; the
// code lets callers (and tests) distinguish the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
    if (!condition) throw Error(code, what);
}

}  // namespace snnk
