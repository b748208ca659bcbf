#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dtc/device.hpp"

namespace dtc {

enum class TrigVariant { Sin, Cos };
enum class RpeTarget { ThetaP, ThetaS, ThetaD };
const char* rpe_target_name(RpeTarget t);

// Phase picked up per repetition in units of the target angle.
double rpe_amplification(RpeTarget t);
// iSWAP pulses per repetition.
int rpe_iswaps_per_rep(RpeTarget t);

// Pulse settings used by the RPE sequence builders.
struct RpePulseSettings {
  double amplitude = 1.0;  // amplitude of the amplified iSWAPs
  double half_amplitude = 0.5;  // amplitude of the sqrt(iSWAP) prep/measure pulses
  bool alternate_ym = true;  // theta_d only
};

PulseSequence build_theta_p_sequences(int n, TrigVariant v, const RpePulseSettings& s = {});
PulseSequence build_theta_s_sequences(int n, TrigVariant v, const RpePulseSettings& s = {});
PulseSequence build_theta_d_sequences(int n, TrigVariant v, const RpePulseSettings& s = {});
PulseSequence build_rpe_sequence(RpeTarget t, int n, TrigVariant v, const RpePulseSettings& s = {});
// Trig value = sign * <Z1> for the sequence above.
double rpe_readout_sign(RpeTarget t, TrigVariant v);

struct RpeMeasurementPair {
  std::uint64_t n_reps = 1;
  double sin_value = 0.0, cos_value = 0.0;
  double sin_err = 0.0, cos_err = 0.0;
  std::uint64_t shots = 0;

  void validate() const;
};

RpeMeasurementPair measure_rpe_pair(const VirtualDevice& dev, RpeTarget t, std::uint64_t n_reps,
                                    const RpePulseSettings& s, std::uint64_t shots, std::uint64_t seed);

// Quadrant-tracking update: atan2 of the pair divided by amplification*2^k,
// on the branch nearest prev_theta.
double rpe_update(double prev_theta, const RpeMeasurementPair& pair, int k, double amplification);

struct RpeGeneration {
  int k = 0;
  std::uint64_t n_reps = 1;
  RpeMeasurementPair pair;
  double theta = 0.0;
  std::uint64_t seed = 0;
  int retries = 0;  // ambiguous-branch retries with doubled shots
};

struct RpeEstimate {
  RpeTarget target = RpeTarget::ThetaP;
  double prior = 0.0;
  double theta = 0.0;
  int k_max = 0;
  double amplification = 1.0;
  std::vector<RpeGeneration> generations;

  double uncertainty() const;  // pi / (amplification 2^k_max)
};

// Source of (sin, cos) pairs for n repetitions.
using RpePairSource = std::function<RpeMeasurementPair(std::uint64_t n_reps, std::uint64_t shots, std::uint64_t seed)>;

struct RpeRunOptions {
  int k_max = 6;
  std::uint64_t shots = 1024;
  std::uint64_t seed = 0;
  int max_retries = 4;
};

RpeEstimate run_rpe(RpeTarget t, const RpePairSource& source, double prior, const RpeRunOptions& opt);

// Red-sideband chevron.
struct ChevronMap {
  std::vector<double> detunings;  // rad/s
  std::vector<double> times;  // s
  std::vector<std::vector<double>> population;  // [detuning][time], P(Q1 excited)
};

struct ChevronFit {
  double g = 0.0;  // rad/s
  double center = 0.0;  // rad/s
  double scale = 1.0, offset = 0.0;
  double g_err = 0.0, center_err = 0.0;
  double rms = 0.0;
};

ChevronMap synthetic_chevron(double g, double center, const std::vector<double>& detunings,
                             const std::vector<double>& times);
ChevronMap run_chevron(const VirtualDevice& dev, const std::vector<double>& detunings,
                       const std::vector<double>& times, std::uint64_t shots, std::uint64_t seed);
ChevronFit rough_chevron_fit(const ChevronMap& map);

struct CalibrationOptions {
  int max_k = 6;
  std::uint64_t shots = 1024;  // per point, chevron and rough estimates included
  std::uint64_t seed = 0;
  bool alternate_ym = true;
  std::vector<double> chevron_detunings;  // empty: default grid
  std::vector<double> chevron_times;
};

struct CalibrationResult {
  ChevronFit chevron;
  double theta_p_rough = 0.0;
  double amplitude_rough = 1.0;
  double theta_s_rough = 0.0, theta_d_rough = 0.0;  // at amplitude_rough

  double theta_p = 0.0;  // unit-amplitude pulse
  double amplitude = 1.0;  // pi / (2 theta_p)
  double theta_s = 0.0, theta_d = 0.0;  // at the corrected amplitude
  double theta_1 = 0.0, theta_2 = 0.0;
  double vz1 = 0.0, vz2 = 0.0;

  RpeEstimate rpe_p, rpe_s, rpe_d;

  GateCalibration gate_calibration() const { return {amplitude, 0.0, vz1, vz2}; }
};

CalibrationResult calibrate_iswap(const VirtualDevice& dev, const CalibrationOptions& opt = {});

}  // namespace dtc
