#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace invcone {

enum class ErrorCode {
    NonSquare,
    DimensionTooLarge,
    DimensionMismatch,
    SingularQ,
    NonPositiveTau,
    NonPositiveC,
    InvalidParams,
    UnknownId,
    UnsupportedDimension,
    SingularOperator,
    TooLargeForDense,
    PartialConeUnsupported,
    BoundaryNode,
    ConvergenceFailure,
    InvalidCertificate,
    Schema,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every library failure is reported through this type; `code()` is stable
/// and is what the CLI maps onto exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace invcone
