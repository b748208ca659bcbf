#include "dtc/error.hpp"

namespace dtc {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NotHermitian: return "NotHermitian";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotTracePreserving: return "NotTracePreserving";
    case Errc::DegenerateDenominator: return "DegenerateDenominator";
    case Errc::StraddlePole: return "StraddlePole";
    case Errc::DimensionTooLarge: return "DimensionTooLarge";
    case Errc::AmbiguousLabeling: return "AmbiguousLabeling";
    case Errc::NoSignChange: return "NoSignChange";
    case Errc::NotUnimodal: return "NotUnimodal";
    case Errc::BadAxis: return "BadAxis";
    case Errc::DuplicateDetected: return "DuplicateDetected";
    case Errc::NotInGroup: return "NotInGroup";
    case Errc::Unphysical: return "Unphysical";
    case Errc::InvalidSequence: return "InvalidSequence";
    case Errc::AmbiguousBranch: return "AmbiguousBranch";
    case Errc::ConvergenceStall: return "ConvergenceStall";
    case Errc::FitDiverged: return "FitDiverged";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::SolverFailure: return "SolverFailure";
    case Errc::NotCP: return "NotCP";
    case Errc::NotNearUnitary: return "NotNearUnitary";
    case Errc::ConventionMismatch: return "ConventionMismatch";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::NonDecaying: return "NonDecaying";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace dtc
