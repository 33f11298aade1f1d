#include "awr/errors.hpp"

namespace awr {

const char* error_code_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::NonZeroMean: return "NonZeroMean";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::ContinuityViolated: return "ContinuityViolated";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::PositivityFailure: return "PositivityFailure";
    case ErrorCode::IncompatibleMass: return "IncompatibleMass";
    case ErrorCode::EndpointMismatch: return "EndpointMismatch";
    case ErrorCode::NotSolenoidal: return "NotSolenoidal";
    case ErrorCode::NotTraceless: return "NotTraceless";
    case ErrorCode::LambdaDepleted: return "LambdaDepleted";
    case ErrorCode::BadConfig: return "BadConfig";
    }
    return "UnknownError";
}

} // namespace awr
