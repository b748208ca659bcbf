#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dtc/device.hpp"
#include "dtc/gates.hpp"

namespace dtc {

enum class RbObservable { Z1, Z2, Z1Z2, P00 };
const char* rb_observable_name(RbObservable o);

struct RbCurve {
  RbObservable observable = RbObservable::P00;
  std::vector<int> lengths;
  std::vector<double> mean, stderr_mean;
  int seeds_per_length = 0;
  // samples[l][s]: per-sequence value; seeds[l][s]: sequence seed.
  std::vector<std::vector<double>> samples;
  std::vector<std::vector<std::uint64_t>> seeds;

  // Lengths strictly increasing, means in range for the observable.
  void validate() const;
};

struct RbOptions {
  std::vector<int> lengths{2, 4, 8, 16, 32, 64, 96};
  int seeds_per_length = 30;
  std::uint64_t shots = 1024;  // 0: exact probabilities
  std::uint64_t seed = 0;
  GateCalibration calibration;
};

// Clifford indices of one standard or interleaved sequence: m - 1 random
// elements then the recovery. Interleaved sequences put `interleaved` before
// each random element and return 2m - 1 entries.
std::vector<std::size_t> rb_clifford_sequence(const CliffordGroup& group, int length, std::uint64_t seed,
                                              const std::size_t* interleaved = nullptr);
// Lowered primitives, a CliffordMark after every element.
PulseSequence rb_pulse_sequence(const CliffordGroup& group, const std::vector<std::size_t>& cliffords,
                                const GateCalibration& cal);
// Per-qubit single-qubit Clifford indices, m - 1 random plus recovery.
std::array<std::vector<int>, 2> sim_rb_sequence(const CliffordGroup& group, int length, std::uint64_t seed);
PulseSequence sim_rb_pulse_sequence(const CliffordGroup& group, const std::array<std::vector<int>, 2>& c1);

struct InterleavedCurves {
  RbCurve standard, interleaved;
};
struct SimRbCurves {
  RbCurve z1, z2, z1z2;
};

// Sequences fan out over (length, seed) with OpenMP.
RbCurve run_standard_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt);
InterleavedCurves run_interleaved_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt);
SimRbCurves run_simultaneous_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt);

namespace serial {
RbCurve run_standard_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt);
InterleavedCurves run_interleaved_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt);
SimRbCurves run_simultaneous_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt);
}  // namespace serial

// F = A p^m + B.
struct DecayFit {
  double A = 0.0, p = 1.0, B = 0.0;
  std::array<std::array<double, 3>, 3> covariance{};  // (A, p, B)
  int d = 4;
  double r = 0.0;  // (d - 1)(1 - p) / d
  double p_err = 0.0, r_err = 0.0;
  double reduced_chi2 = 0.0;
};

double error_rate(double p, int d);
// Weighted least squares, weights from the per-length standard errors.
// InsufficientData below four lengths, FitDiverged, NonDecaying if p > 1 + 3 sigma.
DecayFit fit_decay(const RbCurve& curve, int d);

// 1 - (d - 1)/d (p_std - p_int)/p_std, d = 4.
double interleaved_fidelity(const DecayFit& fit_std, const DecayFit& fit_int);
// 1 - (2/5) tau sum_i (1/(2 T1_i) + 1/T2_i).
double decoherence_limited_fidelity(const NoiseModel& noise, double tau);

enum class Q2State { Ground, Excited };

struct JazzOptions {
  std::vector<double> delays;  // s; empty: 0 to 4 us in 81 steps
  double detuning_hz = 1e6;  // artificial fringe from the delay-proportional virtual Z
  std::uint64_t shots = 1024;
  std::uint64_t seed = 0;
};
struct JazzResult {
  Q2State q2_state = Q2State::Ground;
  std::vector<double> delays, z1;
  double frequency_hz = 0.0, frequency_err_hz = 0.0;
  double amplitude = 0.0, decay_rate = 0.0;
};

// Echo Ramsey on Q1 with both qubits flipped at mid delay.
PulseSequence jazz_sequence(Q2State q2, double delay, double detuning_hz);
JazzResult run_jazz(const VirtualDevice& dev, Q2State q2, const JazzOptions& opt);
// Fringe frequency fit of z(t); FitDiverged if no oscillation is found.
JazzResult fit_ramsey(const std::vector<double>& delays, const std::vector<double>& z);
// Signed g_zz in rad/s.
double jazz_extract_gzz(double freq_ground_hz, double freq_excited_hz);

}  // namespace dtc
