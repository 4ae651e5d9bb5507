#include "qpspec/errors.hpp"

namespace qpspec {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::NonMonotoneEdges: return "NonMonotoneEdges";
    case Errc::EvenLength: return "EvenLength";
    case Errc::BranchPointSingularity: return "BranchPointSingularity";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::WindowViolation: return "WindowViolation";
    case Errc::ContourCollision: return "ContourCollision";
    case Errc::NoRoots: return "NoRoots";
    case Errc::OutOfNeighborhood: return "OutOfNeighborhood";
    case Errc::RegimeMismatch: return "RegimeMismatch";
    case Errc::DegenerateRoots: return "DegenerateRoots";
    case Errc::OutOfSigma: return "OutOfSigma";
    case Errc::PathThroughSpectrum: return "PathThroughSpectrum";
    case Errc::HypothesisFailed: return "HypothesisFailed";
    case Errc::M12Vanishes: return "M12Vanishes";
    case Errc::CalibrationDiverged: return "CalibrationDiverged";
    case Errc::EdgeStall: return "EdgeStall";
    case Errc::ConsistencyFailure: return "ConsistencyFailure";
    case Errc::PoleOnContour: return "PoleOnContour";
    case Errc::RealnessViolation: return "RealnessViolation";
    case Errc::NoiseDominated: return "NoiseDominated";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::NoResonance: return "NoResonance";
    case Errc::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

}  // namespace qpspec
