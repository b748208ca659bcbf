#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <variant>
#include <vector>

#include "dtc/gates.hpp"
#include "dtc/numerics.hpp"

namespace dtc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct NoiseModel {
  std::array<double, 2> t1{kInf, kInf};  // s
  std::array<double, 2> t2{kInf, kInf};  // s, echo
  double gate_duration_1q = 20e-9;
  double gate_duration_2q = 40e-9;
  double depol_1q = 0.0;  // per single-qubit pulse, on the driven qubit
  double depol_2q = 0.0;  // per parametric pulse
  double depol_per_clifford = 0.0;  // applied at each CliffordMark
  std::array<double, 2> prep_error{0.0, 0.0};  // P(|1>) after reset
  // readout[q][s][m]: probability of reporting m when qubit q is in s.
  std::array<std::array<std::array<double, 2>, 2>, 2> readout{{{{{1, 0}, {0, 1}}}, {{{1, 0}, {0, 1}}}}};

  void validate() const;
  static NoiseModel noiseless() { return {}; }
  // Measured coherence of the two data qubits, otherwise ideal.
  static NoiseModel paper_coherence();
  // Symmetric assignment error e on both qubits.
  void set_readout_error(double e);
};

// Hidden truth of the simulated device.
struct TrueGateParams {
  GateParams gate;  // iSWAP produced at unit amplitude over gate_duration_2q
  double residual_gzz = 0.0;  // rad/s, (g_zz/4) sz sz
  std::array<double, 2> detuning{0.0, 0.0};  // static drive-frame detunings, rad/s
  std::array<double, 2> sq_over_rotation{0.0, 0.0};  // fractional rotation-angle error

  void validate() const;
};

// Pulse primitives.
struct SQRotation {
  Axis axis{};
  double angle = 0.0;
  int qubit = 0;
  bool concurrent = false;  // shares the time slot of the preceding pulse
};
// Reset, optionally followed by ideal instantaneous rotations (tomography preps).
struct Prep {
  std::vector<SQRotation> basis;
};
struct VirtualZ {
  double angle1 = 0.0;
  double angle2 = 0.0;
};
struct ParametricPulse {
  double amplitude = 1.0;
  double phase = 0.0;
  double duration = 0.0;  // 0: nominal gate_duration_2q
  double detuning = 0.0;  // pump detuning from the sideband, rad/s
};
struct Idle {
  double duration = 0.0;
};
struct CliffordMark {};
// Ideal, instantaneous basis change followed by Z-basis readout.
struct Measure {
  std::vector<SQRotation> basis;
};

using Primitive = std::variant<Prep, SQRotation, VirtualZ, ParametricPulse, Idle, CliffordMark, Measure>;

struct PulseSequence {
  std::vector<Primitive> ops;
  // Begins with Prep, ends with Measure, neither appears elsewhere.
  void validate() const;
};

struct MeasurementRecord {
  std::uint64_t shots = 0;  // 0: exact probabilities
  std::array<double, 4> counts{};  // 00, 01, 10, 11 (probabilities when shots = 0)
  double z1 = 0.0, z2 = 0.0, z1z2 = 0.0;
  double z1_err = 0.0, z2_err = 0.0, z1z2_err = 0.0;
  std::uint64_t seed = 0;

  double p00() const { return (1.0 + z1 + z2 + z1z2) / 4.0; }
  static MeasurementRecord from_probabilities(const std::array<double, 4>& p);
  static MeasurementRecord from_counts(const std::array<std::uint64_t, 4>& n, std::uint64_t seed);
};

// Calibrated compilation settings for the device iSWAP.
struct GateCalibration {
  double amplitude = 1.0;
  double phase = 0.0;
  double vz1 = 0.0;  // virtual Z after each iSWAP
  double vz2 = 0.0;
};

// Lower ideal gate terms to primitives. Single-qubit runs between iSWAPs are
// packed into shared slots, one pulse per qubit per slot.
std::vector<Primitive> lower_terms(const std::vector<GateTerm>& terms, const GateCalibration& cal);

class VirtualDevice {
 public:
  VirtualDevice(TrueGateParams truth, NoiseModel noise);

  const NoiseModel& noise() const { return noise_; }
  // Test-harness access to the hidden parameters.
  const TrueGateParams& truth_for_testing() const { return truth_; }

  ComplexMatrix reset() const;
  ComplexMatrix decohere(const ComplexMatrix& rho, double duration, bool with_zz = true) const;
  ComplexMatrix apply_iswap_pulse(const ComplexMatrix& rho, double amplitude, double phase) const;
  // Eq.-8 parameters realized by a pulse.
  GateParams pulse_params(const ParametricPulse& p) const;
  ComplexMatrix pulse_unitary(const ParametricPulse& p) const;

  // Final state just before the readout basis change is applied (included).
  ComplexMatrix evolve(const PulseSequence& seq) const;
  // Outcome probabilities after readout assignment errors.
  std::array<double, 4> probabilities(const PulseSequence& seq) const;
  MeasurementRecord expectation(const PulseSequence& seq) const;
  // Multinomial shot sampling; deterministic in seed.
  MeasurementRecord run_sequence(const PulseSequence& seq, std::uint64_t shots, std::uint64_t seed) const;

  // Unitary of the coherent part of a primitive list (noise ignored).
  ComplexMatrix coherent_unitary(const std::vector<Primitive>& ops) const;

 private:
  ComplexMatrix sq_unitary(const SQRotation& r) const;
  ComplexMatrix idle_unitary(double duration) const;

  TrueGateParams truth_;
  NoiseModel noise_;
};

}  // namespace dtc
