#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dtc/device.hpp"
#include "dtc/numerics.hpp"

namespace dtc {

inline constexpr int kTomoPreps = 36;
inline constexpr int kTomoSettings = 16;
inline constexpr int kTomoObservables = 3;  // Z1, Z2, Z1Z2

// Two-qubit Pauli label of basis index m (sigma_{m/4} x sigma_{m%4}), e.g. "XY".
std::string pauli_label(int m);

// chi in the unnormalized two-qubit Pauli basis, rho -> sum chi_ij P_i rho P_j,
// normalized to Tr chi = 1. basis[a] is the standard Pauli index of row a.
struct ProcessMatrix {
  ComplexMatrix chi;
  std::array<int, 16> basis{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  double tp_violation = 0.0;  // Frobenius norm of sum chi_ij P_j P_i - I
  int iterations = 0;
  double cost = 0.0;  // 0.5 * squared residual of the data fit

  // NotHermitian, NotCP or NotTracePreserving on violation.
  void validate() const;
  ProcessMatrix in_standard_order() const;
};

ProcessMatrix chi_from_unitary(const ComplexMatrix& u);
ProcessMatrix chi_from_kraus(const std::vector<ComplexMatrix>& kraus);
ComplexMatrix apply_chi(const ProcessMatrix& chi, const ComplexMatrix& rho);
// Sum chi_ij P_j P_i.
ComplexMatrix tp_operator(const ProcessMatrix& chi);

// Single-qubit preparation rotations {I, Rx(pi/2), Rx(-pi/2), Ry(pi/2), Ry(-pi/2), Rx(pi)}
// and measurement pre-rotations {I, Rx(pi/2), Ry(pi/2), Rx(pi)}.
struct TomoRotation {
  Axis axis{};
  double angle = 0.0;  // 0 means identity
};
const std::array<TomoRotation, 6>& tomo_prep_rotations();
const std::array<TomoRotation, 4>& tomo_measure_rotations();
// prep p = 6 * (Q1 state) + (Q2 state); setting m = 4 * (Q1 rotation) + (Q2 rotation).
ComplexMatrix tomo_prep_state(int p);
ComplexMatrix tomo_setting_unitary(int m);

// 576 sequences, index 16 * prep + setting.
std::vector<PulseSequence> generate_tomography_circuits(const std::vector<Primitive>& gate);

struct TomographyDataset {
  std::vector<MeasurementRecord> records;  // 576, index 16 * prep + setting

  void validate() const;  // InsufficientData unless complete
  std::vector<double> expectations() const;  // 1728, (prep, setting, observable)
  std::vector<double> std_errors() const;
};

TomographyDataset run_tomography(const VirtualDevice& dev, const std::vector<Primitive>& gate, std::uint64_t shots,
                                 std::uint64_t seed);
// Exact expectations of an ideal experiment on the channel chi.
TomographyDataset synthetic_tomography(const ProcessMatrix& chi);

struct ReconstructOptions {
  std::array<int, 16> basis{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  double tp_tolerance = 1e-6;
  double tolerance = 1e-10;  // ADMM primal and dual residual
  int max_iterations = 20000;
};

// Trace-preserving linear inversion without the CP constraint.
ProcessMatrix linear_inversion_chi(const TomographyDataset& data, const ReconstructOptions& opt = {});
// Least squares subject to chi PSD and trace preserving.
ProcessMatrix reconstruct_chi(const TomographyDataset& data, const ReconstructOptions& opt = {});

struct KrausTerm {
  double weight = 0.0;
  ComplexMatrix op;  // Tr(K^dagger K) = 4
};
// Weights descending; NotCP if chi has eigenvalues below -1e-8.
std::vector<KrausTerm> kraus_decompose(const ProcessMatrix& chi);

// arg of the |11> entry relative to the |00> entry and the single-excitation
// block determinant; NotNearUnitary if |K^dagger K - I| > 0.1.
double extract_phi_zz(const ComplexMatrix& kraus_dominant);

// Re Tr(chi_a chi_b); ConventionMismatch unless both have unit trace.
double process_fidelity(const ProcessMatrix& a, const ProcessMatrix& b);
// (1 + 4 F) / 5; OutOfRange outside [0, 1].
double gate_fidelity(double f_process);

struct Interval {
  double lo = 0.0, hi = 0.0;
};
struct BootstrapResult {
  Interval gate_fidelity;
  Interval phi_zz;
  std::vector<double> fidelities, phi_zzs;
};

// Gaussian resampling of each expectation with its standard error, refit per
// resample, 2.5/97.5 percentiles. Resamples run in parallel.
BootstrapResult bootstrap_confidence(const TomographyDataset& data, const ProcessMatrix& chi_th, int resamples = 100,
                                     std::uint64_t seed = 0);
namespace serial {
BootstrapResult bootstrap_confidence(const TomographyDataset& data, const ProcessMatrix& chi_th, int resamples = 100,
                                     std::uint64_t seed = 0);
}

struct HintonCell {
  std::string row, col;
  double magnitude = 0.0, phase = 0.0;
};
std::vector<HintonCell> hinton_export(const ProcessMatrix& chi);

}  // namespace dtc
