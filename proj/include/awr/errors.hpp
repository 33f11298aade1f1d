#pragma once

#include <stdexcept>
#include <string>

namespace awr {

// Failure categories. Each maps to one precondition of the construction:
// a violated compatibility condition, a domain violation of a model function,
// or an exhausted schedule. The CLI maps DataError-category failures to exit
// code 2 and verification failures to exit code 1.
enum class ErrorCode {
    NonZeroMean,        // Poisson/elliptic right-hand side has nonzero mean
    DomainViolation,    // model function evaluated outside its domain
    ContinuityViolated, // supplied pair breaks the mass equation beyond tolerance
    BadWindow,          // time-shape support windows are not ordered 0 < s0 < sT < T
    PositivityFailure,  // no admissible perturbation size keeps the density positive
    IncompatibleMass,   // endpoint densities carry different total mass
    EndpointMismatch,   // accumulated mean drift misses the endpoint identity
    NotSolenoidal,      // advective velocity is not divergence-free
    NotTraceless,       // matrix argument expected trace-free is not
    LambdaDepleted,     // energy schedule reaches zero before the final time
    BadConfig,          // malformed configuration or field file
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace awr
