#include "mdm/error.hpp"

namespace mdm {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::DrawCountTooSmall: return "DrawCountTooSmall";
    case ErrorKind::ControlNearZero: return "ControlNearZero";
    case ErrorKind::ControlMeanNotPositive: return "ControlMeanNotPositive";
    case ErrorKind::ControlMeanZero: return "ControlMeanZero";
    case ErrorKind::EmptyDraws: return "EmptyDraws";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ScaleMismatch: return "ScaleMismatch";
    case ErrorKind::IncompleteDecisionMatrix: return "IncompleteDecisionMatrix";
    case ErrorKind::TieGroundTruth: return "TieGroundTruth";
    case ErrorKind::RegimeUnattainable: return "RegimeUnattainable";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::ValueError: return "ValueError";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace mdm
