#pragma once

#include <stdexcept>
#include <string>

namespace dtc {

enum class Errc {
  NotHermitian,
  NoConvergence,
  DimensionMismatch,
  NotTracePreserving,
  DegenerateDenominator,
  StraddlePole,
  DimensionTooLarge,
  AmbiguousLabeling,
  NoSignChange,
  NotUnimodal,
  BadAxis,
  DuplicateDetected,
  NotInGroup,
  Unphysical,
  InvalidSequence,
  AmbiguousBranch,
  ConvergenceStall,
  FitDiverged,
  InsufficientData,
  SolverFailure,
  NotCP,
  NotNearUnitary,
  ConventionMismatch,
  OutOfRange,
  NonDecaying,
  ConfigInvalid,
  IoError,
};

const char* errc_name(Errc c);

// All library failures are reported through this type. `field` carries the
// config key path for ConfigInvalid and is empty otherwise.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::string field = {})
      : std::runtime_error(what), code_(code), field_(std::move(field)) {}
  Errc code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Errc code_;
  std::string field_;
};

}  // namespace dtc
