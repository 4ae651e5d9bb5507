#pragma once

#include <stdexcept>
#include <string>

namespace qpspec {

enum class Errc {
    NonMonotoneEdges,
    EvenLength,
    BranchPointSingularity,
    OutOfRange,
    WindowViolation,
    ContourCollision,
    NoRoots,
    OutOfNeighborhood,
    RegimeMismatch,
    DegenerateRoots,
    OutOfSigma,
    PathThroughSpectrum,
    HypothesisFailed,
    M12Vanishes,
    CalibrationDiverged,
    EdgeStall,
    ConsistencyFailure,
    PoleOnContour,
    RealnessViolation,
    NoiseDominated,
    InvalidRange,
    NoResonance,
    InvalidConfig,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace qpspec
