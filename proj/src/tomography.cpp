#include "dtc/tomography.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>

#include "dtc/error.hpp"
#include "dtc/gates.hpp"
#include "dtc/rng.hpp"

namespace dtc {

namespace {

constexpr int kP = 16;  // Pauli basis size
constexpr int kX = kP * kP;  // real coordinates of a 16x16 Hermitian matrix
constexpr int kRows = kTomoPreps * kTomoSettings * kTomoObservables;
const double kRt2 = std::sqrt(2.0);

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

// Orthonormal real coordinates of an n x n Hermitian matrix: diagonal entries,
// then sqrt2 Re and sqrt2 Im of each upper entry, row by row.
template <class M>
Vec herm_coords(const M& h, int n) {
  Vec x(n * n);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const cplx v = h(i, j);
      if (i == j) {
        x[k++] = v.real();
      } else {
        x[k++] = kRt2 * v.real();
        x[k++] = kRt2 * v.imag();
      }
    }
  return x;
}

ComplexMatrix coords_herm(const Vec& x, int n) {
  ComplexMatrix h(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      if (i == j) {
        h(i, i) = x[k++];
      } else {
        const cplx v(x[k] / kRt2, x[k + 1] / kRt2);
        k += 2;
        h(i, j) = v;
        h(j, i) = std::conj(v);
      }
    }
  return h;
}

CMat to_eigen(const ComplexMatrix& m) {
  CMat o(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) o(i, j) = m(i, j);
  return o;
}

ComplexMatrix rot_op(const TomoRotation& r) {
  return r.angle == 0.0 ? ComplexMatrix::identity(2) : rotation(r.axis, r.angle);
}

// Linear forward model of the tomography experiment in a given Pauli order.
struct ChiModel {
  std::array<int, 16> basis;
  std::vector<ComplexMatrix> paulis;
  Mat B;  // kRows x kX
  Mat T;  // 16 x kX, coordinates of sum chi_ij P_j P_i
  Vec t0;  // coordinates of I
  Mat BtB;
  Eigen::SelfAdjointEigenSolver<Mat> eig;

  explicit ChiModel(const std::array<int, 16>& order) : basis(order) {
    std::array<bool, 16> seen{};
    for (int m : order) {
      if (m < 0 || m >= kP || seen[m]) throw Error(Errc::OutOfRange, "basis order must permute 0..15");
      seen[m] = true;
      paulis.push_back(pauli::two(m));
    }
    // G[row][i*16+j] = Tr(O_row P_i rho_p P_j).
    std::vector<std::vector<cplx>> g(kRows, std::vector<cplx>(kX));
    std::vector<std::array<ComplexMatrix, 3>> obs(kTomoSettings);
    const std::array<ComplexMatrix, 3> zs{channels::embed(pauli::Z(), 0), channels::embed(pauli::Z(), 1),
                                          tensor_product(pauli::Z(), pauli::Z())};
    for (int m = 0; m < kTomoSettings; ++m) {
      const auto u = tomo_setting_unitary(m);
      for (int o = 0; o < 3; ++o) obs[m][o] = adjoint(u) * zs[o] * u;
    }
    for (int p = 0; p < kTomoPreps; ++p) {
      const auto rho = tomo_prep_state(p);
      for (int i = 0; i < kP; ++i) {
        const auto pr = paulis[i] * rho;
        for (int j = 0; j < kP; ++j) {
          const auto mij = pr * paulis[j];
          for (int m = 0; m < kTomoSettings; ++m)
            for (int o = 0; o < 3; ++o) {
              cplx tr = 0.0;
              for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) tr += obs[m][o](a, b) * mij(b, a);
              g[(p * kTomoSettings + m) * 3 + o][i * kP + j] = tr;
            }
        }
      }
    }
    B.resize(kRows, kX);
    T.resize(16, kX);
    Vec e = Vec::Zero(kX);
    for (int k = 0; k < kX; ++k) {
      e.setZero();
      e[k] = 1.0;
      const auto h = coords_herm(e, kP);
      for (int r = 0; r < kRows; ++r) {
        cplx s = 0.0;
        for (int i = 0; i < kP; ++i)
          for (int j = 0; j < kP; ++j)
            if (h(i, j) != 0.0) s += h(i, j) * g[r][i * kP + j];
        B(r, k) = s.real();
      }
      ComplexMatrix t(4, 4);
      for (int i = 0; i < kP; ++i)
        for (int j = 0; j < kP; ++j)
          if (h(i, j) != 0.0) t += h(i, j) * (paulis[j] * paulis[i]);
      T.col(k) = herm_coords(t, 4);
    }
    t0 = herm_coords(ComplexMatrix::identity(4), 4);
    BtB = B.transpose() * B;
    eig.compute(BtB);
  }
};

const ChiModel& model_for(const std::array<int, 16>& order) {
  static const ChiModel standard({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15});
  if (order == standard.basis) return standard;
  thread_local std::vector<std::unique_ptr<ChiModel>> cache;
  for (const auto& m : cache)
    if (m->basis == order) return *m;
  cache.push_back(std::make_unique<ChiModel>(order));
  return *cache.back();
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

ProcessMatrix make_pm(const ComplexMatrix& chi, const ChiModel& m) {
  ProcessMatrix pm;
  pm.chi = chi;
  pm.basis = m.basis;
  pm.tp_violation = (m.T * herm_coords(chi, kP) - m.t0).norm();
  return pm;
}

Vec linear_solve(const ChiModel& m, const Vec& y) {
  Mat kkt = Mat::Zero(kX + 16, kX + 16);
  kkt.topLeftCorner(kX, kX) = m.BtB;
  kkt.topRightCorner(kX, 16) = m.T.transpose();
  kkt.bottomLeftCorner(16, kX) = m.T;
  Vec rhs(kX + 16);
  rhs.head(kX) = m.B.transpose() * y;
  rhs.tail(16) = m.t0;
  const Vec sol = kkt.fullPivLu().solve(rhs);
  if (!sol.allFinite()) throw Error(Errc::SolverFailure, "linear inversion failed");
  return sol.head(kX);
}

// Euclidean projection of Hermitian coordinates onto the PSD cone.
Vec project_psd(const Vec& x) {
  const CMat h = to_eigen(coords_herm(x, kP));
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  const Vec ev = es.eigenvalues().cwiseMax(0.0);
  const CMat p = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  return herm_coords(p, kP);
}

struct FitOut {
  Vec x;
  int iterations = 0;
};

// min 0.5 |B x - y|^2 subject to T x = t0 and chi(x) PSD, by ADMM on the split
// x (TP, quadratic) = w (PSD) with residual balancing of the penalty rho.
FitOut cptp_fit(const ChiModel& m, const Vec& y, const Vec& w0, const Vec& u0, const ReconstructOptions& opt) {
  const Vec b = m.B.transpose() * y;
  double rho = m.BtB.trace() / kX;
  Eigen::PartialPivLU<Mat> lu;
  auto factor = [&]() {
    Mat kkt = Mat::Zero(kX + 16, kX + 16);
    kkt.topLeftCorner(kX, kX) = m.BtB + rho * Mat::Identity(kX, kX);
    kkt.topRightCorner(kX, 16) = m.T.transpose();
    kkt.bottomLeftCorner(16, kX) = m.T;
    lu.compute(kkt);
  };
  factor();
  Vec w = w0, u = u0, x = w0, rhs(kX + 16);
  rhs.tail(16) = m.t0;
  FitOut out;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    rhs.head(kX) = b + rho * (w - u);
    x = lu.solve(rhs).head(kX);
    const Vec wp = w;
    w = project_psd(x + u);
    u += x - w;
    const double r = (x - w).norm(), s = rho * (w - wp).norm();
    out.iterations = it;
    if (r < opt.tolerance && s < opt.tolerance) break;
    if (it % 25 == 0 && (r > 10 * s || s > 10 * r)) {
      const double f = r > s ? 2.0 : 0.5;
      rho *= f;
      u /= f;
      factor();
    }
  }
  if (!w.allFinite()) throw Error(Errc::SolverFailure, "chi fit produced non-finite values");
  out.x = w;
  return out;
}

ProcessMatrix reconstruct_from(const ChiModel& m, const Vec& y, const ReconstructOptions& opt) {
  const Vec lin = linear_solve(m, y);
  const auto f = cptp_fit(m, y, project_psd(lin), Vec::Zero(kX), opt);
  auto pm = make_pm(coords_herm(f.x, kP), m);
  pm.iterations = f.iterations;
  pm.cost = 0.5 * (m.B * f.x - y).squaredNorm();
  if (pm.tp_violation > opt.tp_tolerance)
    throw Error(Errc::SolverFailure, "chi fit did not reach the trace-preservation tolerance");
  return pm;
}

}  // namespace

std::string pauli_label(int m) {
  static const char* s = "IXYZ";
  return std::string{s[m / 4], s[m % 4]};
}

void ProcessMatrix::validate() const {
  if (chi.rows() != 16 || !chi.square()) throw Error(Errc::DimensionMismatch, "chi must be 16x16");
  if (!is_hermitian(chi, 1e-9)) throw Error(Errc::NotHermitian, "chi is not Hermitian");
  if (min_eigenvalue(chi) < -1e-8) throw Error(Errc::NotCP, "chi has a negative eigenvalue");
  if (frobenius_norm(tp_operator(*this) - ComplexMatrix::identity(4)) > 1e-6)
    throw Error(Errc::NotTracePreserving, "chi is not trace preserving");
}

ProcessMatrix ProcessMatrix::in_standard_order() const {
  ProcessMatrix o = *this;
  for (int a = 0; a < 16; ++a) {
    o.basis[a] = a;
    for (int b = 0; b < 16; ++b) o.chi(basis[a], basis[b]) = chi(a, b);
  }
  return o;
}

ProcessMatrix chi_from_kraus(const std::vector<ComplexMatrix>& kraus) {
  ProcessMatrix pm;
  pm.chi = ComplexMatrix(16, 16);
  for (const auto& k : kraus) {
    if (k.rows() != 4 || k.cols() != 4) throw Error(Errc::DimensionMismatch, "two-qubit Kraus operators are 4x4");
    std::array<cplx, 16> u;
    for (int m = 0; m < 16; ++m) u[m] = trace(pauli::two(m) * k) / 4.0;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) pm.chi(i, j) += u[i] * std::conj(u[j]);
  }
  pm.tp_violation = frobenius_norm(tp_operator(pm) - ComplexMatrix::identity(4));
  return pm;
}

ProcessMatrix chi_from_unitary(const ComplexMatrix& u) { return chi_from_kraus({u}); }

ComplexMatrix apply_chi(const ProcessMatrix& chi, const ComplexMatrix& rho) {
  ComplexMatrix out(4, 4);
  for (int i = 0; i < 16; ++i) {
    const auto pr = pauli::two(chi.basis[i]) * rho;
    for (int j = 0; j < 16; ++j)
      if (chi.chi(i, j) != 0.0) out += chi.chi(i, j) * (pr * pauli::two(chi.basis[j]));
  }
  return out;
}

ComplexMatrix tp_operator(const ProcessMatrix& chi) {
  ComplexMatrix out(4, 4);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      if (chi.chi(i, j) != 0.0) out += chi.chi(i, j) * (pauli::two(chi.basis[j]) * pauli::two(chi.basis[i]));
  return out;
}

const std::array<TomoRotation, 6>& tomo_prep_rotations() {
  static const std::array<TomoRotation, 6> r{{{kAxisX, 0.0},
                                              {kAxisX, kPi / 2},
                                              {kAxisX, -kPi / 2},
                                              {kAxisY, kPi / 2},
                                              {kAxisY, -kPi / 2},
                                              {kAxisX, kPi}}};
  return r;
}

const std::array<TomoRotation, 4>& tomo_measure_rotations() {
  static const std::array<TomoRotation, 4> r{{{kAxisX, 0.0}, {kAxisX, kPi / 2}, {kAxisY, kPi / 2}, {kAxisX, kPi}}};
  return r;
}

ComplexMatrix tomo_prep_state(int p) {
  if (p < 0 || p >= kTomoPreps) throw Error(Errc::OutOfRange, "prep index out of range");
  const auto& r = tomo_prep_rotations();
  const auto u = tensor_product(rot_op(r[p / 6]), rot_op(r[p % 6]));
  ComplexMatrix g(4, 4);
  g(0, 0) = 1.0;
  return conjugate(u, g);
}

ComplexMatrix tomo_setting_unitary(int m) {
  if (m < 0 || m >= kTomoSettings) throw Error(Errc::OutOfRange, "setting index out of range");
  const auto& r = tomo_measure_rotations();
  return tensor_product(rot_op(r[m / 4]), rot_op(r[m % 4]));
}

std::vector<PulseSequence> generate_tomography_circuits(const std::vector<Primitive>& gate) {
  const auto& pr = tomo_prep_rotations();
  const auto& mr = tomo_measure_rotations();
  std::vector<PulseSequence> out;
  out.reserve(kTomoPreps * kTomoSettings);
  for (int p = 0; p < kTomoPreps; ++p)
    for (int m = 0; m < kTomoSettings; ++m) {
      PulseSequence s;
      Prep prep;
      const auto& r1 = pr[p / 6];
      const auto& r2 = pr[p % 6];
      if (r1.angle != 0.0) prep.basis.push_back(SQRotation{r1.axis, r1.angle, 0, false});
      if (r2.angle != 0.0) prep.basis.push_back(SQRotation{r2.axis, r2.angle, 1, false});
      s.ops.push_back(prep);
      s.ops.insert(s.ops.end(), gate.begin(), gate.end());
      Measure meas;
      if (mr[m / 4].angle != 0.0) meas.basis.push_back(SQRotation{mr[m / 4].axis, mr[m / 4].angle, 0, false});
      if (mr[m % 4].angle != 0.0) meas.basis.push_back(SQRotation{mr[m % 4].axis, mr[m % 4].angle, 1, false});
      s.ops.push_back(meas);
      out.push_back(std::move(s));
    }
  return out;
}

void TomographyDataset::validate() const {
  if (records.size() != static_cast<std::size_t>(kTomoPreps * kTomoSettings))
    throw Error(Errc::InsufficientData, "tomography needs 576 records");
}

std::vector<double> TomographyDataset::expectations() const {
  validate();
  std::vector<double> y;
  y.reserve(kRows);
  for (const auto& r : records) y.insert(y.end(), {r.z1, r.z2, r.z1z2});
  return y;
}

std::vector<double> TomographyDataset::std_errors() const {
  validate();
  std::vector<double> e;
  e.reserve(kRows);
  for (const auto& r : records) e.insert(e.end(), {r.z1_err, r.z2_err, r.z1z2_err});
  return e;
}

TomographyDataset run_tomography(const VirtualDevice& dev, const std::vector<Primitive>& gate, std::uint64_t shots,
                                 std::uint64_t seed) {
  const auto circuits = generate_tomography_circuits(gate);
  TomographyDataset d;
  d.records.resize(circuits.size());
  const long n = static_cast<long>(circuits.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i)
    d.records[i] = dev.run_sequence(circuits[i], shots, derive_seed(seed, static_cast<std::uint64_t>(i)));
  return d;
}

TomographyDataset synthetic_tomography(const ProcessMatrix& chi) {
  TomographyDataset d;
  for (int p = 0; p < kTomoPreps; ++p) {
    const auto out = apply_chi(chi, tomo_prep_state(p));
    for (int m = 0; m < kTomoSettings; ++m) {
      const auto r = conjugate(tomo_setting_unitary(m), out);
      d.records.push_back(MeasurementRecord::from_probabilities(
          {r(0, 0).real(), r(1, 1).real(), r(2, 2).real(), r(3, 3).real()}));
    }
  }
  return d;
}

ProcessMatrix linear_inversion_chi(const TomographyDataset& data, const ReconstructOptions& opt) {
  const auto& m = model_for(opt.basis);
  return make_pm(coords_herm(linear_solve(m, to_vec(data.expectations())), kP), m);
}

ProcessMatrix reconstruct_chi(const TomographyDataset& data, const ReconstructOptions& opt) {
  return reconstruct_from(model_for(opt.basis), to_vec(data.expectations()), opt);
}

std::vector<KrausTerm> kraus_decompose(const ProcessMatrix& chi) {
  const auto std_chi = chi.in_standard_order();
  const auto sp = hermitian_eigendecomposition(std_chi.chi);
  if (sp.eigenvalues.front() < -1e-8) throw Error(Errc::NotCP, "chi has a negative eigenvalue");
  std::vector<KrausTerm> out;
  for (int k = 15; k >= 0; --k) {
    KrausTerm t;
    t.weight = std::max(0.0, sp.eigenvalues[k]);
    t.op = ComplexMatrix(4, 4);
    for (int m = 0; m < 16; ++m) t.op += sp.eigenvectors(m, k) * pauli::two(m);
    out.push_back(std::move(t));
  }
  return out;
}

double extract_phi_zz(const ComplexMatrix& k) {
  if (k.rows() != 4 || k.cols() != 4) throw Error(Errc::DimensionMismatch, "expected a 4x4 operator");
  if (max_abs_diff(adjoint(k) * k, ComplexMatrix::identity(4)) > 0.1)
    throw Error(Errc::NotNearUnitary, "dominant Kraus operator is not close to unitary");
  const cplx block = k(1, 1) * k(2, 2) - k(1, 2) * k(2, 1);
  return std::arg(k(3, 3) * k(0, 0) / block);
}

double process_fidelity(const ProcessMatrix& a, const ProcessMatrix& b) {
  const double ta = trace(a.chi).real(), tb = trace(b.chi).real();
  if (std::abs(ta - 1.0) > 1e-6 || std::abs(tb - 1.0) > 1e-6)
    throw Error(Errc::ConventionMismatch, "process fidelity needs Tr chi = 1 for both inputs");
  const auto sa = a.in_standard_order(), sb = b.in_standard_order();
  return trace(sa.chi * sb.chi).real();
}

double gate_fidelity(double f) {
  if (!(f >= -1e-9 && f <= 1.0 + 1e-9)) throw Error(Errc::OutOfRange, "process fidelity outside [0, 1]");
  return (1.0 + 4.0 * f) / 5.0;
}

namespace {

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(i);
  return i + 1 < v.size() ? v[i] * (1 - f) + v[i + 1] * f : v[i];
}

void bootstrap_one(const ChiModel& m, const Vec& y, const std::vector<double>& err, const ProcessMatrix& chi_th,
                   std::uint64_t seed, int r, double& fid, double& phi) {
  auto rng = make_rng(seed, static_cast<std::uint64_t>(r));
  std::normal_distribution<double> n01(0.0, 1.0);
  Vec yr = y;
  for (Eigen::Index i = 0; i < yr.size(); ++i) yr[i] = std::clamp(y[i] + err[i] * n01(rng), -1.0, 1.0);
  const auto pm = reconstruct_from(m, yr, {});
  fid = gate_fidelity(std::clamp(process_fidelity(pm, chi_th), 0.0, 1.0));
  phi = extract_phi_zz(kraus_decompose(pm).front().op);
}

BootstrapResult finish(std::vector<double> f, std::vector<double> p) {
  BootstrapResult b;
  b.gate_fidelity = {percentile(f, 0.025), percentile(f, 0.975)};
  b.phi_zz = {percentile(p, 0.025), percentile(p, 0.975)};
  b.fidelities = std::move(f);
  b.phi_zzs = std::move(p);
  return b;
}

BootstrapResult run_bootstrap(const TomographyDataset& data, const ProcessMatrix& chi_th, int resamples,
                              std::uint64_t seed, bool parallel) {
  if (resamples < 2) throw Error(Errc::OutOfRange, "bootstrap needs at least two resamples");
  const auto& m = model_for(ReconstructOptions{}.basis);
  const Vec y = to_vec(data.expectations());
  const auto err = data.std_errors();
  std::vector<double> f(resamples), p(resamples);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int r = 0; r < resamples; ++r) bootstrap_one(m, y, err, chi_th, seed, r, f[r], p[r]);
  return finish(std::move(f), std::move(p));
}

}  // namespace

BootstrapResult bootstrap_confidence(const TomographyDataset& data, const ProcessMatrix& chi_th, int resamples,
                                     std::uint64_t seed) {
  return run_bootstrap(data, chi_th, resamples, seed, true);
}

namespace serial {
BootstrapResult bootstrap_confidence(const TomographyDataset& data, const ProcessMatrix& chi_th, int resamples,
                                     std::uint64_t seed) {
  return run_bootstrap(data, chi_th, resamples, seed, false);
}
}  // namespace serial

std::vector<HintonCell> hinton_export(const ProcessMatrix& chi) {
  const auto s = chi.in_standard_order();
  std::vector<HintonCell> out;
  out.reserve(256);
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b)
      out.push_back({pauli_label(a), pauli_label(b), std::abs(s.chi(a, b)), std::arg(s.chi(a, b))});
  return out;
}

}  // namespace dtc
