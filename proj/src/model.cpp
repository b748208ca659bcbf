#include "dtc/model.hpp"

#include <cmath>
#include <limits>

#include "dtc/error.hpp"

namespace dtc {

namespace {

constexpr double kGHz = kTwoPi * 1e9;

// Charging capacitance in fF from E_C/h in MHz.
double capacitance_ff(double ec_mhz) { return 19370.1 / ec_mhz; }

// Capacitive coupling between modes with shunt capacitances ci, cj (fF),
// coupling capacitance cij (fF) and frequencies wi, wj (any common unit).
double capacitive_g(double cij, double ci, double cj, double wi, double wj) {
  return cij * std::sqrt(wi * wj) / (2.0 * std::sqrt((ci + cij) * (cj + cij)));
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

void DeviceParams::validate() const {
  for (double a : alpha)
    if (!(a < 0.0)) throw Error(Errc::OutOfRange, "anharmonicities must be negative");
  if (levels_per_mode < 2 || coupler_truncation() < 2) throw Error(Errc::OutOfRange, "need at least 2 levels per mode");
  if (g13 < 0.0 || g24 < 0.0 || EJ5 < 0.0 || EC3 < 0.0 || EC4 < 0.0)
    throw Error(Errc::OutOfRange, "couplings and energies must be nonnegative");
  for (double w : omega)
    if (!std::isfinite(w)) throw Error(Errc::OutOfRange, "non-finite frequency");
}

DeviceParams default_device_params() {
  // Circuit values in GHz, MHz and fF.
  const double w1 = 4.91, w2 = 5.16;
  const double a1_mhz = 172.0, a2_mhz = 164.0;
  const double ej_coupler = 14.6, ec_coupler = 0.150;
  const double ej5 = 5.8;
  const double c13 = 13.5, c24 = 13.9, c34 = 7.91;

  const double wc = std::sqrt(8.0 * ej_coupler * ec_coupler) - ec_coupler;
  const double cq1 = capacitance_ff(a1_mhz);
  const double cq2 = capacitance_ff(a2_mhz);
  const double cc = capacitance_ff(ec_coupler * 1e3);

  DeviceParams p;
  p.omega = {w1 * kGHz, w2 * kGHz, wc * kGHz, wc * kGHz};
  p.alpha = {-kTwoPi * (a1_mhz * 1e6), -kTwoPi * (a2_mhz * 1e6), -ec_coupler * kGHz, -ec_coupler * kGHz};
  p.g13 = capacitive_g(c13, cq1, cc, w1, wc) * kGHz;
  p.g24 = capacitive_g(c24, cq2, cc, w2, wc) * kGHz;
  p.gC = -(c34 * wc / (2.0 * (cc + c34))) * kGHz;
  p.EJ5 = ej5 * kGHz;
  p.EC3 = ec_coupler * kGHz;
  p.EC4 = ec_coupler * kGHz;
  p.flux_slope = {kTwoPi * 50e6, kTwoPi * 50e6};
  p.levels_per_mode = 4;
  return p;
}

DeviceParams with_coupler_frequency(DeviceParams p, double coupler_freq) {
  p.omega[2] = coupler_freq;
  p.omega[3] = coupler_freq;
  return p;
}

FluxPoint FluxPoint::canonical(double phi) {
  if (!std::isfinite(phi)) throw Error(Errc::OutOfRange, "flux must be finite");
  double r = phi - std::floor(phi);
  if (r >= 1.0) r = 0.0;
  return FluxPoint{r};
}

double inductive_coupling(const DeviceParams& p, FluxPoint f) {
  if (!(p.omega[2] > 0.0 && p.omega[3] > 0.0)) throw Error(Errc::OutOfRange, "coupler frequencies must be positive");
  return 4.0 * p.EJ5 * std::cos(kTwoPi * f.phi_c) * std::sqrt(p.EC3 * p.EC4) / std::sqrt(p.omega[2] * p.omega[3]);
}

double effective_coupling(const DeviceParams& p, FluxPoint f) {
  const double gl = inductive_coupling(p, f);
  const double wbar = 0.5 * (p.omega[2] + p.omega[3]);
  const double delta = 0.5 * (p.omega[2] - p.omega[3]);
  const double j = p.gC - gl;
  const double detunings[2] = {p.omega[0] - wbar, p.omega[1] - wbar};
  double sum = 0.0;
  for (double dj : detunings) {
    const double d2 = dj * dj - delta * delta - j * j;
    if (std::abs(d2) < 1e-6 * wbar * wbar)
      throw Error(Errc::DegenerateDenominator, "effective coupling denominator vanishes");
    sum += (j + (p.gC + gl) * dj / wbar) / (2.0 * d2);
  }
  return p.g13 * p.g24 * sum;
}

ZzEstimate zz_perturbative(const DeviceParams& p, FluxPoint f) {
  const double a1 = p.alpha[0], a2 = p.alpha[1];
  const double d = p.omega[0] - p.omega[1];
  if (std::abs(d - a1) <= 1e-3 * std::abs(a1) || std::abs(d + a2) <= 1e-3 * std::abs(a2))
    throw Error(Errc::StraddlePole, "qubit detuning sits on a perturbative pole");
  const double g = effective_coupling(p, f);
  ZzEstimate z;
  z.method = ZzMethod::Perturbative;
  z.gzz = 2.0 * g * g * (a1 + a2) / ((d - a1) * (d + a2));
  return z;
}

std::size_t fock_index(const DeviceParams& p, int n1, int n2, int n3, int n4) {
  const std::size_t l = static_cast<std::size_t>(p.levels_per_mode);
  const std::size_t lc = static_cast<std::size_t>(p.coupler_truncation());
  return ((static_cast<std::size_t>(n1) * l + static_cast<std::size_t>(n2)) * lc + static_cast<std::size_t>(n3)) * lc +
         static_cast<std::size_t>(n4);
}

ComplexMatrix build_hamiltonian(const DeviceParams& p, FluxPoint f) {
  const int l = p.levels_per_mode;
  const int lc = p.coupler_truncation();
  if (l < 2 || lc < 2) throw Error(Errc::OutOfRange, "need at least 2 levels per mode");
  const std::size_t dim = static_cast<std::size_t>(l) * l * lc * lc;
  if (dim > 1024) throw Error(Errc::DimensionTooLarge, "Fock space exceeds 1024 states");
  const int dims[4] = {l, l, lc, lc};

  ComplexMatrix h(dim, dim);
  const double gl = inductive_coupling(p, f);
  const double j34 = p.gC - gl;
  const double k34 = -(p.gC + gl);

  auto index = [&](const int n[4]) { return fock_index(p, n[0], n[1], n[2], n[3]); };

  int n[4];
  for (n[0] = 0; n[0] < l; ++n[0])
    for (n[1] = 0; n[1] < l; ++n[1])
      for (n[2] = 0; n[2] < lc; ++n[2])
        for (n[3] = 0; n[3] < lc; ++n[3]) {
          const std::size_t from = index(n);
          double diag = 0.0;
          for (int m = 0; m < 4; ++m) diag += p.omega[m] * n[m] + 0.5 * p.alpha[m] * n[m] * (n[m] - 1);
          h(from, from) = diag;

          // c (a_j^dagger a_k + a_k^dagger a_j): add the a_j^dagger a_k half; the
          // other half appears when the loop reaches the target state.
          auto hop = [&](int jm, int km, double c) {
            if (n[km] == 0 || n[jm] + 1 >= dims[jm]) return;
            int t[4] = {n[0], n[1], n[2], n[3]};
            const double amp = std::sqrt(static_cast<double>(n[km])) * std::sqrt(static_cast<double>(n[jm] + 1));
            --t[km];
            ++t[jm];
            const std::size_t to = index(t);
            h(to, from) += c * amp;
            h(from, to) += c * amp;
          };
          // c (a_j a_k + h.c.): pair annihilation and its conjugate.
          auto pair = [&](int jm, int km, double c) {
            if (n[jm] == 0 || n[km] == 0) return;
            int t[4] = {n[0], n[1], n[2], n[3]};
            const double amp = std::sqrt(static_cast<double>(n[jm])) * std::sqrt(static_cast<double>(n[km]));
            --t[jm];
            --t[km];
            const std::size_t to = index(t);
            h(to, from) += c * amp;
            h(from, to) += c * amp;
          };
          hop(2, 3, j34);
          hop(0, 2, p.g13);
          hop(1, 3, p.g24);
          if (p.counter_rotating) {
            pair(2, 3, k34);
            pair(0, 2, p.g13);
            pair(1, 3, p.g24);
          }
        }
  return h;
}

ZzEstimate zz_spectral(const DeviceParams& p, FluxPoint f) {
  const ComplexMatrix h = build_hamiltonian(p, f);
  const Spectrum s = hermitian_eigendecomposition(h);
  const int labels[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  ZzEstimate z;
  z.method = ZzMethod::Spectral;
  for (int k = 0; k < 4; ++k) {
    const std::size_t bare = fock_index(p, labels[k][0], labels[k][1], 0, 0);
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t c = 0; c < s.eigenvalues.size(); ++c) {
      const double ov = std::norm(s.eigenvectors(bare, c));
      if (ov > best) {
        best = ov;
        arg = c;
      }
    }
    if (best < 0.5) throw Error(Errc::AmbiguousLabeling, "dressed state overlap below 0.5");
    z.energies[k] = s.eigenvalues[arg];
  }
  z.gzz = z.energies[3] - z.energies[2] - z.energies[1] + z.energies[0];
  return z;
}

FluxPoint find_cancellation_flux(const DeviceParams& p, CancellationObjective objective, double lo, double hi) {
  if (!(hi > lo)) throw Error(Errc::OutOfRange, "empty flux bracket");
  if (objective == CancellationObjective::GeffRoot) {
    auto g = [&](double x) { return effective_coupling(p, FluxPoint{x}); };
    double glo = g(lo);
    const double ghi = g(hi);
    if (glo == 0.0) return FluxPoint{lo};
    if (ghi == 0.0) return FluxPoint{hi};
    if ((glo > 0.0) == (ghi > 0.0)) throw Error(Errc::NoSignChange, "effective coupling keeps its sign on the bracket");
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      const double gm = g(mid);
      if (gm == 0.0) return FluxPoint{mid};
      if ((gm > 0.0) == (glo > 0.0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    return FluxPoint{0.5 * (lo + hi)};
  }

  auto f = [&](double x) { return std::abs(zz_spectral(p, FluxPoint{x}).gzz); };
  const double a0 = lo, b0 = hi;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-5) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  // A minimum pinned to the bracket edge means the bracket never shrank around an interior minimum.
  if (x - a0 < 2e-5 || b0 - x < 2e-5) throw Error(Errc::NotUnimodal, "minimum sits on the bracket boundary");
  const double fx = f(x);
  if (fx > f(a0) || fx > f(b0)) throw Error(Errc::NotUnimodal, "golden-section minimum exceeds an endpoint");
  return FluxPoint{x};
}

double parametric_coupling(const DeviceParams& p, double delta_phi) {
  if (delta_phi < 0.0) throw Error(Errc::OutOfRange, "flux modulation amplitude must be nonnegative");
  return 0.5 * std::sqrt(p.flux_slope[0] * p.flux_slope[1]) * delta_phi;
}

double chevron_population(double g_rsb, double detuning, double t) {
  if (t < 0.0) throw Error(Errc::OutOfRange, "negative pulse duration");
  const double w2 = detuning * detuning + 4.0 * g_rsb * g_rsb;
  if (w2 == 0.0) return 0.0;
  const double s = std::sin(0.5 * std::sqrt(w2) * t);
  return 4.0 * g_rsb * g_rsb / w2 * s * s;
}

namespace {
SweepRow sweep_point(const DeviceParams& p, double phi) {
  SweepRow r{phi, nan(), nan(), nan()};
  const FluxPoint f = FluxPoint::canonical(phi);
  try {
    r.g_eff = effective_coupling(p, f);
    r.g_zz_pert = zz_perturbative(p, f).gzz;
  } catch (const Error&) {
  }
  try {
    r.g_zz_spec = zz_spectral(p, f).gzz;
  } catch (const Error&) {
  }
  return r;
}
}  // namespace

std::vector<SweepRow> flux_sweep(const DeviceParams& p, const std::vector<double>& phis) {
  std::vector<SweepRow> rows(phis.size());
  const long n = static_cast<long>(phis.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = sweep_point(p, phis[static_cast<std::size_t>(i)]);
  return rows;
}

namespace serial {
std::vector<SweepRow> flux_sweep(const DeviceParams& p, const std::vector<double>& phis) {
  std::vector<SweepRow> rows;
  rows.reserve(phis.size());
  for (double phi : phis) rows.push_back(sweep_point(p, phi));
  return rows;
}
}  // namespace serial

}  // namespace dtc
