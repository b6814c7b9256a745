#include "qbm/errors.hpp"

namespace qbm {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::PoleArgument: return "PoleArgument";
        case ErrorKind::BranchCut: return "BranchCut";
        case ErrorKind::ZeroArgument: return "ZeroArgument";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
        case ErrorKind::SeriesNotConverged: return "SeriesNotConverged";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::NonPhysicalState: return "NonPhysicalState";
        case ErrorKind::StiffnessFailure: return "StiffnessFailure";
        case ErrorKind::SingularTransition: return "SingularTransition";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Error";
}

}  // namespace qbm
