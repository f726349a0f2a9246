#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdm {

enum class ErrorKind {
    DegenerateSample,
    DrawCountTooSmall,
    ControlNearZero,
    ControlMeanNotPositive,
    ControlMeanZero,
    EmptyDraws,
    InvalidArgument,
    ScaleMismatch,
    IncompleteDecisionMatrix,
    TieGroundTruth,
    RegimeUnattainable,
    SchemaMismatch,
    ValueError,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map them onto exit codes.
class StatError : public std::runtime_error {
public:
    StatError(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind),
          detail_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// Message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

/// True for failures that come from a statistical precondition on the data
/// rather than from malformed input.
constexpr bool is_statistical(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::DegenerateSample:
    case ErrorKind::ControlNearZero:
    case ErrorKind::ControlMeanNotPositive:
    case ErrorKind::ControlMeanZero:
    case ErrorKind::TieGroundTruth:
    case ErrorKind::RegimeUnattainable:
        return true;
    default:
        return false;
    }
}

}  // namespace mdm
