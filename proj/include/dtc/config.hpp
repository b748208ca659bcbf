#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtc/device.hpp"
#include "dtc/model.hpp"

namespace dtc {

struct SpectrumConfig {
  double phi_min = 0.0, phi_max = 0.5;  // flux quanta
  int points = 101;
  double search_lo = 0.2, search_hi = 0.45;
};

struct CalibrateConfig {
  int max_k = 6;
  bool alternate_ym = true;
};

struct TomographyConfig {
  bool calibrate = true;
  int bootstrap = 100;
};

struct RbConfig {
  std::vector<int> lengths{2, 4, 8, 16, 32, 64, 96};
  int seeds_per_length = 30;
  bool calibrate = true;
};

struct JazzConfig {
  double detuning = kTwoPi * 1e6;  // rad/s
  double delay_max = 4e-6;  // s
  int points = 81;
};

struct RunConfig {
  DeviceParams circuit = default_device_params();
  NoiseModel noise = NoiseModel::paper_coherence();
  TrueGateParams truth = default_truth();
  std::uint64_t seed = 0;
  std::uint64_t shots = 1024;
  std::string out = "results";
  SpectrumConfig spectrum;
  CalibrateConfig calibrate;
  TomographyConfig tomography;
  RbConfig rb;
  JazzConfig jazz;

  // Residual ZZ at the measured cancellation point, otherwise ideal gate.
  static TrueGateParams default_truth();
};

// Sectioned key = value text, ';' starts a comment line. Quantities carry
// units: GHz, MHz, kHz, Hz or rad/s for rates (stored as rad/s) and s, ms, us, ns for
// times (coherence times may be inf). Missing sections keep the default
// profile; unknown keys, bad values and unphysical combinations raise
// ConfigInvalid with the key path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Every key with its resolved value; parsing the text reproduces c exactly.
std::string format_config(const RunConfig& c);

// Unit conversion at the text boundary.
double parse_frequency(const std::string& text, const std::string& field);  // rad/s
double parse_time(const std::string& text, const std::string& field);  // s
std::string format_frequency(double rad_per_s, const std::string& unit);
std::string format_time(double seconds, const std::string& unit);

}  // namespace dtc
