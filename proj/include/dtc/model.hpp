#pragma once

#include <array>
#include <vector>

#include "dtc/numerics.hpp"

namespace dtc {

// Double-transmon-coupler circuit. Modes 1,2 are the data qubits, 3,4 the
// coupler transmons. All rates in rad/s.
struct DeviceParams {
  std::array<double, 4> omega{};
  std::array<double, 4> alpha{};
  double g13 = 0.0;
  double g24 = 0.0;
  double gC = 0.0;  // signed; capacitive and inductive parts have opposite sign
  double EJ5 = 0.0;
  double EC3 = 0.0;
  double EC4 = 0.0;
  std::array<double, 2> flux_slope{};  // d omega_i / d Phi, rad/s per flux quantum
  int levels_per_mode = 4;
  int coupler_levels = 0;  // 0: same as levels_per_mode
  bool counter_rotating = true;

  int coupler_truncation() const { return coupler_levels > 0 ? coupler_levels : levels_per_mode; }
  void validate() const;
};

// Nominal circuit: measured data-qubit frequencies/anharmonicities, coupler
// and coupling strengths derived from the junction and capacitance values.
DeviceParams default_device_params();

// Same couplings with both coupler modes moved to `coupler_freq` (rad/s).
DeviceParams with_coupler_frequency(DeviceParams p, double coupler_freq);

struct FluxPoint {
  double phi_c = 0.0;  // units of the flux quantum
  static FluxPoint canonical(double phi);
};

enum class ZzMethod { Perturbative, Spectral };

struct ZzEstimate {
  double gzz = 0.0;
  ZzMethod method = ZzMethod::Perturbative;
  std::array<double, 4> energies{};  // E00, E01, E10, E11 (spectral only)
};

double inductive_coupling(const DeviceParams& p, FluxPoint f);
double effective_coupling(const DeviceParams& p, FluxPoint f);
ZzEstimate zz_perturbative(const DeviceParams& p, FluxPoint f);
ComplexMatrix build_hamiltonian(const DeviceParams& p, FluxPoint f);
ZzEstimate zz_spectral(const DeviceParams& p, FluxPoint f);

enum class CancellationObjective { GeffRoot, MinAbsGzzSpectral };
FluxPoint find_cancellation_flux(const DeviceParams& p, CancellationObjective objective, double lo, double hi);

double parametric_coupling(const DeviceParams& p, double delta_phi);
// Generalized Rabi transfer |01> -> |10>; detuning = omega_p - Delta_RSB.
double chevron_population(double g_rsb, double detuning, double t);

// Fock index of |n1 n2 n3 n4> in build_hamiltonian's basis.
std::size_t fock_index(const DeviceParams& p, int n1, int n2, int n3, int n4);

struct SweepRow {
  double phi_c;
  double g_eff;      // NaN where the denominator is degenerate
  double g_zz_pert;  // NaN where undefined
  double g_zz_spec;  // NaN where labels are ambiguous
};

// Points are evaluated in parallel.
std::vector<SweepRow> flux_sweep(const DeviceParams& p, const std::vector<double>& phis);

namespace serial {
std::vector<SweepRow> flux_sweep(const DeviceParams& p, const std::vector<double>& phis);
}

}  // namespace dtc
