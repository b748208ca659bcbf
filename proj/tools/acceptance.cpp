// Acceptance run: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number. Exit status is the number of failures.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dtc/benchmarking.hpp"
#include "dtc/error.hpp"
#include "dtc/model.hpp"
#include "dtc/rpe.hpp"
#include "dtc/tomography.hpp"

using namespace dtc;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
};

void Outcome::check(bool ok, const char* fmt, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  if (!detail.empty()) detail += "; ";
  detail += buf;
  if (!ok) {
    detail += " [x]";
    pass = false;
  }
}

const CliffordGroup& group() {
  static const CliffordGroup g;
  return g;
}

VirtualDevice device(const NoiseModel& n, double gzz = 0.0) {
  TrueGateParams t;
  t.residual_gzz = gzz;
  return VirtualDevice(t, n);
}

TrueGateParams injected(double gzz = 0.0) {
  TrueGateParams t;
  t.gate.theta_p = kPi / 2 + 0.03;
  t.gate.theta_1 = 0.05;
  t.gate.theta_2 = -0.02;
  t.residual_gzz = gzz;
  return t;
}

const double kResidualGzz = -kTwoPi * 220e3;
const double kTau = 40e-9;

Outcome clifford_structure() {
  Outcome o;
  const auto& g = group();
  o.check(g.size() == 11520, "size %zu", g.size());
  const std::array<std::size_t, 4> want{576, 5184, 576, 5184};
  const std::array<CliffordClass, 4> cls{CliffordClass::SQ, CliffordClass::CnotLike, CliffordClass::SwapLike,
                                         CliffordClass::IswapLike};
  for (int i = 0; i < 4; ++i)
    o.check(g.count(cls[i]) == want[i], "%s %zu", clifford_class_name(cls[i]), g.count(cls[i]));
  return o;
}

Outcome decompositions() {
  Outcome o;
  const auto cnot = cnot_from_iswaps(), swap = swap_from_iswaps();
  const double dc = global_phase_distance(sequence_unitary(cnot), cnot_matrix());
  const double ds = global_phase_distance(sequence_unitary(swap), swap_matrix());
  o.check(dc < 1e-10 && iswap_count(cnot) == 2, "CNOT %d iSWAPs, distance %.1e", iswap_count(cnot), dc);
  o.check(ds < 1e-10 && iswap_count(swap) == 3, "SWAP %d iSWAPs, distance %.1e", iswap_count(swap), ds);
  return o;
}

Outcome golden_formulas() {
  Outcome o;
  const auto paper = NoiseModel::paper_coherence();
  const double f = decoherence_limited_fidelity(paper, kTau);
  auto limit = paper;
  for (int i = 0; i < 2; ++i) limit.t2[i] = 2 * limit.t1[i];
  const double fl = decoherence_limited_fidelity(limit, kTau);
  o.check(std::abs(100 * f - 99.72) <= 0.01, "F_dec %.4f%%", 100 * f);
  o.check(std::abs(100 * fl - 99.84) <= 0.01, "F_dec(T2=2T1) %.4f%%", 100 * fl);
  const double phi = kResidualGzz / 4 * kTau;
  o.check(std::abs(phi - (-0.0138)) <= 2e-4, "phi_zz model %.5f rad", phi);
  return o;
}

double slope_log2(const std::array<double, 7>& se, int trials) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int x = 1; x <= 6; ++x) {
    const double y = 0.5 * std::log2(se[x] / trials);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  return (6 * sxy - sx * sy) / (6 * sxx - sx * sx);
}

Outcome rpe_heisenberg() {
  Outcome o;
  const auto t = injected();
  const VirtualDevice clean(t, NoiseModel::noiseless());
  const double tp = t.gate.theta_p, t1 = t.gate.theta_1, t2 = t.gate.theta_2;

  // Noiseless: RMS error per generation against the iSWAP count 2^x.
  const int trials = 400;
  std::array<std::array<double, 7>, 3> se{};
  double worst = 0.0;
  for (int tr = 0; tr < trials; ++tr) {
    CalibrationOptions co;
    co.shots = 4096;
    co.seed = 500 + static_cast<std::uint64_t>(tr);
    const auto r = calibrate_iswap(clean, co);
    const double a2 = r.amplitude * r.amplitude;
    const double truth[3] = {tp * r.amplitude_rough, (t1 + t2) * a2, (t1 - t2) * a2};
    const RpeEstimate* est[3] = {&r.rpe_p, &r.rpe_s, &r.rpe_d};
    for (int p = 0; p < 3; ++p)
      for (const auto& g : est[p]->generations) se[p][g.k + (p == 2 ? 1 : 0)] += std::pow(g.theta - truth[p], 2);
    worst = std::max({worst, std::abs(r.theta_p - tp), std::abs(r.theta_1 - t1 * a2), std::abs(r.theta_2 - t2 * a2)});
  }
  const char* names[3] = {"theta_p", "theta_s", "theta_d"};
  for (int p = 0; p < 3; ++p) {
    const double s = slope_log2(se[p], trials);
    o.check(s <= -1.0, "%s slope %.3f", names[p], s);
  }
  o.check(worst <= 1e-3, "noiseless worst final error %.1e over %d trials", worst, trials);

  // Paper coherence at 1024 shots.
  const VirtualDevice noisy(t, NoiseModel::paper_coherence());
  int good = 0;
  for (int tr = 0; tr < 20; ++tr) {
    CalibrationOptions co;
    co.shots = 1024;
    co.seed = 900 + static_cast<std::uint64_t>(tr);
    const auto r = calibrate_iswap(noisy, co);
    const double a2 = r.amplitude * r.amplitude;
    const double e = std::max({std::abs(r.theta_p - tp), std::abs(r.theta_1 - t1 * a2), std::abs(r.theta_2 - t2 * a2)});
    good += e <= 5e-3;
  }
  o.check(good >= 18, "noisy %d/20 within 5e-3", good);
  return o;
}

Outcome rpe_spam() {
  Outcome o;
  const auto t = injected();
  NoiseModel spam;
  spam.prep_error = {0.02, 0.02};
  spam.set_readout_error(0.03);
  CalibrationOptions co;
  co.shots = 1024;
  co.seed = 31;
  const double a = calibrate_iswap(VirtualDevice(t, NoiseModel::noiseless()), co).theta_p;
  const double b = calibrate_iswap(VirtualDevice(t, spam), co).theta_p;
  o.check(std::abs(a - b) < kPi / 128, "|d theta_p| %.1e (bound %.1e)", std::abs(a - b), kPi / 128);
  return o;
}

// Interleaved RB estimate on the calibrated paper-noise device, shared by 6 and 7.
struct PaperDevice {
  VirtualDevice dev{injected(kResidualGzz), NoiseModel::paper_coherence()};
  GateCalibration cal;
  double irb = 0.0;
};

const PaperDevice& paper_device() {
  static const PaperDevice pd = [] {
    PaperDevice d;
    CalibrationOptions co;
    co.seed = 11;
    d.cal = calibrate_iswap(d.dev, co).gate_calibration();
    RbOptions ro;
    ro.seed = 12;
    ro.calibration = d.cal;
    const auto c = run_interleaved_rb(d.dev, group(), ro);
    d.irb = interleaved_fidelity(fit_decay(c.standard, 4), fit_decay(c.interleaved, 4));
    return d;
  }();
  return pd;
}

Outcome tomography_round_trip() {
  Outcome o;
  const auto th = chi_from_unitary(ideal_iswap());
  const double f0 = gate_fidelity(process_fidelity(reconstruct_chi(synthetic_tomography(th)), th));
  o.check(std::abs(f0 - 1) < 1e-6, "ideal 1 - F %.1e", std::abs(f0 - 1));

  std::vector<ComplexMatrix> ks;
  for (const auto& k : channels::depolarizing(0.01, 2)) ks.push_back(k * ideal_iswap());
  const auto r = reconstruct_chi(synthetic_tomography(chi_from_kraus(ks)));
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    ComplexMatrix g(4, 4);
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) g(a, b) = {n(rng), n(rng)};
    auto rho = g * adjoint(g);
    rho *= 1.0 / trace(rho).real();
    ComplexMatrix want(4, 4);
    for (const auto& k : ks) want += k * rho * adjoint(k);
    worst = std::max(worst, max_abs_diff(apply_chi(r, rho), want));
  }
  o.check(worst < 1e-3, "depolarized channel action error %.1e", worst);

  const auto& pd = paper_device();
  const auto data = run_tomography(pd.dev, lower_terms({GateTerm::iswap()}, pd.cal), 100000, 13);
  const double ft = gate_fidelity(std::clamp(process_fidelity(reconstruct_chi(data), th), 0.0, 1.0));
  o.check(std::abs(ft - pd.irb) <= 0.0015, "tomography %.3f%% vs IRB %.3f%%", 100 * ft, 100 * pd.irb);
  return o;
}

Outcome rb_consistency() {
  Outcome o;
  for (double eps : {0.002, 0.01}) {
    NoiseModel n;
    n.depol_per_clifford = eps;
    RbOptions ro;
    ro.seed = 21;
    ro.lengths = {1, 50, 100, 200, 300, 500, 700};
    const auto f = fit_decay(run_standard_rb(device(n), group(), ro), 4);
    const double rel = f.r / (0.75 * eps) - 1;
    o.check(std::abs(rel) < 0.1, "eps %.3f: r off by %+.1f%%", eps, 100 * rel);
  }
  {
    NoiseModel n;
    n.depol_2q = 0.01;
    RbOptions ro;
    ro.seed = 3;
    const auto c = run_interleaved_rb(device(n), group(), ro);
    const double f = interleaved_fidelity(fit_decay(c.standard, 4), fit_decay(c.interleaved, 4));
    const double rel = (1 - f) / 0.0075 - 1;
    o.check(std::abs(rel) < 0.2, "IRB gate error off by %+.1f%%", 100 * rel);
  }
  const double f = paper_device().irb;
  o.check(f >= 0.995 && f <= 0.999, "paper device IRB %.3f%%", 100 * f);
  {
    NoiseModel n;
    n.depol_1q = 0.005;
    RbOptions ro;
    ro.seed = 5;
    const auto c = run_simultaneous_rb(device(n), group(), ro);
    const auto a = fit_decay(c.z1, 2), b = fit_decay(c.z2, 2), z = fit_decay(c.z1z2, 4);
    const double sigma = std::sqrt(std::pow(a.p_err * b.p, 2) + std::pow(b.p_err * a.p, 2) + std::pow(z.p_err, 2));
    const double d = std::abs(a.p * b.p - z.p);
    o.check(d < 1.96 * sigma, "simRB |p1 p2 - p12| %.1e (CI %.1e)", d, 1.96 * sigma);
  }
  return o;
}

Outcome dtc_physics() {
  Outcome o;
  const auto p = default_device_params();
  const auto m = find_cancellation_flux(p, CancellationObjective::MinAbsGzzSpectral, 0.2, 0.45);
  o.check(m.phi_c >= 0.28 && m.phi_c <= 0.36, "minimum at %.4f", m.phi_c);

  auto pert = with_coupler_frequency(p, kTwoPi * 7.5e9);
  pert.g13 = pert.g24 = kTwoPi * 40e6;
  double worst = 0.0;
  for (double phi : {0.1, 0.15, 0.4, 0.45}) {
    const double a = zz_perturbative(pert, {phi}).gzz, b = zz_spectral(pert, {phi}).gzz;
    worst = std::max(worst, std::abs(a - b) / std::abs(b));
  }
  o.check(worst < 0.25, "perturbative vs spectral %.1f%%", 100 * worst);

  const auto above = with_coupler_frequency(p, kTwoPi * 6.5e9);
  const auto ma = find_cancellation_flux(above, CancellationObjective::MinAbsGzzSpectral, 0.2, 0.45);
  const double zb = std::abs(zz_spectral(p, m).gzz) / kTwoPi, za = std::abs(zz_spectral(above, ma).gzz) / kTwoPi;
  o.check(za < zb, "residual above %.3f kHz vs below %.3f kHz", za / 1e3, zb / 1e3);
  return o;
}

Outcome jazz() {
  Outcome o;
  JazzOptions jo;
  jo.seed = 4;
  const double gzz = kTwoPi * 200e3;
  const auto dev = device(NoiseModel::paper_coherence(), gzz);
  const double g =
      jazz_extract_gzz(run_jazz(dev, Q2State::Ground, jo).frequency_hz, run_jazz(dev, Q2State::Excited, jo).frequency_hz);
  o.check(std::abs(g / gzz - 1) < 0.05, "recovered %.1f kHz", g / kTwoPi / 1e3);

  TrueGateParams t;
  t.detuning = {kTwoPi * 300e3, 0.0};
  const VirtualDevice det(t, NoiseModel::noiseless());
  const double e =
      jazz_extract_gzz(run_jazz(det, Q2State::Ground, jo).frequency_hz, run_jazz(det, Q2State::Excited, jo).frequency_hz);
  o.check(std::abs(e) < kTwoPi * 5e3, "echo with 300 kHz detuning %.2f kHz", e / kTwoPi / 1e3);
  return o;
}

Outcome chevron() {
  Outcome o;
  const auto dev = device(NoiseModel::noiseless());
  const double g = parametric_coupling(default_device_params(), 0.25);

  // Full transfer on resonance: parabolic peak of a 0.1 ns grid.
  std::vector<double> fine;
  for (int j = 0; j <= 800; ++j) fine.push_back(0.1e-9 * j);
  const auto line = run_chevron(dev, {0.0}, fine, 0, 0).population[0];
  const auto k = static_cast<std::size_t>(std::max_element(line.begin(), line.end()) - line.begin());
  const double y0 = line[k - 1], y1 = line[k], y2 = line[k + 1];
  const double t_peak = fine[k] + 0.5 * (y0 - y2) / (y0 - 2 * y1 + y2) * 0.1e-9;
  const double t_ref = kPi / (2 * g);
  o.check(std::abs(t_peak / t_ref - 1) < 0.01, "full transfer %.3f ns vs %.3f ns", t_peak * 1e9, t_ref * 1e9);

  std::vector<double> dets, times;
  for (int i = 0; i <= 40; ++i) dets.push_back(kTwoPi * (-20e6 + 1e6 * i));
  for (int j = 0; j <= 100; ++j) times.push_back(2e-9 * j);
  const auto map = run_chevron(dev, dets, times, 0, 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < dets.size(); ++i)
    for (std::size_t j = 0; j < times.size(); ++j) {
      const ComplexMatrix h{{0.0, g}, {g, dets[i]}};
      const double ref = std::norm(expm_hermitian(h, times[j])(1, 0));
      worst = std::max(worst, std::abs(map.population[i][j] - ref));
    }
  o.check(worst < 1e-10, "map vs 2x2 oracle %.1e", worst);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "Clifford group structure", 60, clifford_structure},
      {2, "CNOT and SWAP from iSWAPs", 1, decompositions},
      {3, "decoherence limit and ZZ phase", 1, golden_formulas},
      {4, "RPE Heisenberg scaling", 300, rpe_heisenberg},
      {5, "RPE SPAM robustness", 120, rpe_spam},
      {6, "process tomography", 600, tomography_round_trip},
      {7, "randomized benchmarking", 1200, rb_consistency},
      {8, "coupler physics", 600, dtc_physics},
      {9, "JAZZ", 180, jazz},
      {10, "chevron", 60, chevron},
  };
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!pick.empty() && std::find(pick.begin(), pick.end(), c.id) == pick.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > c.budget_s) o.check(false, "%.1f s over the %.0f s budget", dt, c.budget_s);
    failures += !o.pass;
    std::printf("%s %2d %-32s %8.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, dt, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
