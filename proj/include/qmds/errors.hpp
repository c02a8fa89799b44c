#pragma once

#include <stdexcept>
#include <string>

namespace qmds {

enum class ErrorCode {
    ZeroQuaternion,
    DimensionMismatch,
    DegenerateEdge,
    OutOfRange,
    NonPositiveDistance,
    AsymmetricMask,
    NonConvergence,
    RankDeficient,
    SingularSystem,
    DegenerateAnchors,
    AmbiguityResolutionFailure,
    ZeroAnchorEdges,
    NegativeTopValue,
    ShapeMismatch,
    InvalidConfig,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the harness in particular) can account for it without string
/// matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace qmds
