#pragma once

#include <stdexcept>
#include <string>

namespace qbm {

enum class ErrorKind {
    PoleArgument,
    BranchCut,
    ZeroArgument,
    DomainError,
    ToleranceNotMet,
    SeriesNotConverged,
    InvalidSpec,
    NonPhysicalState,
    StiffnessFailure,
    SingularTransition,
    ConfigError,
    IoError
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// Quadrature or series failure that still carries the best available estimate.
class ToleranceError : public Error {
public:
    ToleranceError(const std::string& what, double estimate, double error_bound,
                   ErrorKind kind = ErrorKind::ToleranceNotMet)
        : Error(kind, what), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const { return estimate_; }
    double error_bound() const { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

}  // namespace qbm
