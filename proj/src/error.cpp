#include "invcone/error.hpp"

namespace invcone {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonSquare: return "NonSquare";
        case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::SingularQ: return "SingularQ";
        case ErrorCode::NonPositiveTau: return "NonPositiveTau";
        case ErrorCode::NonPositiveC: return "NonPositiveC";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::UnknownId: return "UnknownId";
        case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
        case ErrorCode::SingularOperator: return "SingularOperator";
        case ErrorCode::TooLargeForDense: return "TooLargeForDense";
        case ErrorCode::PartialConeUnsupported: return "PartialConeUnsupported";
        case ErrorCode::BoundaryNode: return "BoundaryNode";
        case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::InvalidCertificate: return "InvalidCertificate";
        case ErrorCode::Schema: return "Schema";
    }
    return "Unknown";
}

}  // namespace invcone
