#pragma once
#include <stdexcept>
#include <string>
#include <string_view>

namespace finsler {

enum class ErrorCode {
    NumericalBlowup,
    DegenerateDirection,
    DomainExit,
    SingularMetric,
    DegenerateForm,
    SingularODE,
    RandersTypeDegenerate,
    SprayFormulaSingular,
    SingularFundamentalTensor,
    NotPositive,
    InsufficientSamples,
    PrerequisiteFailed,
    RangeViolation,
    ConstraintViolation,
    ConfigError,
};

inline std::string_view to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::NumericalBlowup: return "NumericalBlowup";
        case ErrorCode::DegenerateDirection: return "DegenerateDirection";
        case ErrorCode::DomainExit: return "DomainExit";
        case ErrorCode::SingularMetric: return "SingularMetric";
        case ErrorCode::DegenerateForm: return "DegenerateForm";
        case ErrorCode::SingularODE: return "SingularODE";
        case ErrorCode::RandersTypeDegenerate: return "RandersTypeDegenerate";
        case ErrorCode::SprayFormulaSingular: return "SprayFormulaSingular";
        case ErrorCode::SingularFundamentalTensor: return "SingularFundamentalTensor";
        case ErrorCode::NotPositive: return "NotPositive";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::PrerequisiteFailed: return "PrerequisiteFailed";
        case ErrorCode::RangeViolation: return "RangeViolation";
        case ErrorCode::ConstraintViolation: return "ConstraintViolation";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

// Single exception type for the toolkit; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace finsler
