#include "qmds/errors.hpp"

namespace qmds {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ZeroQuaternion: return "ZeroQuaternion";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DegenerateEdge: return "DegenerateEdge";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::NonPositiveDistance: return "NonPositiveDistance";
        case ErrorCode::AsymmetricMask: return "AsymmetricMask";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::DegenerateAnchors: return "DegenerateAnchors";
        case ErrorCode::AmbiguityResolutionFailure: return "AmbiguityResolutionFailure";
        case ErrorCode::ZeroAnchorEdges: return "ZeroAnchorEdges";
        case ErrorCode::NegativeTopValue: return "NegativeTopValue";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace qmds
