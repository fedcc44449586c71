#include "elastica/error.hpp"

namespace elastica {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonpositiveStiffness: return "NonpositiveStiffness";
    case ErrorCode::SingularPi: return "SingularPi";
    case ErrorCode::DegenerateEdge: return "DegenerateEdge";
    case ErrorCode::IncompatibleGrid: return "IncompatibleGrid";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::SingularKKT: return "SingularKKT";
    case ErrorCode::StepStalled: return "StepStalled";
    case ErrorCode::InfeasibleInitialState: return "InfeasibleInitialState";
    case ErrorCode::ProjectionFailure: return "ProjectionFailure";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
{
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace elastica
