#include <catch_amalgamated.hpp>
#include <cmath>

#include "dtc/benchmarking.hpp"
#include "dtc/error.hpp"

using namespace dtc;
using Catch::Approx;

namespace {

const CliffordGroup& group() {
  static const CliffordGroup g;
  return g;
}

VirtualDevice device(const NoiseModel& n, double gzz = 0.0) {
  TrueGateParams t;
  t.residual_gzz = gzz;
  return VirtualDevice(t, n);
}

RbCurve synthetic(double A, double p, double B, const std::vector<int>& lengths, RbObservable obs) {
  RbCurve c;
  c.observable = obs;
  c.lengths = lengths;
  c.seeds_per_length = 1;
  for (int m : lengths) {
    c.mean.push_back(A * std::pow(p, m) + B);
    c.stderr_mean.push_back(0.0);
  }
  return c;
}

bool has_code(const Error& e, Errc c) { return e.code() == c; }

const std::vector<int> kLong{1, 50, 100, 200, 300, 500, 700};

}  // namespace

TEST_CASE("decay fit on exact curves", "[rb]") {
  const auto f = fit_decay(synthetic(0.5, 0.98, 0.5, {2, 4, 8, 16, 32, 64, 96}, RbObservable::P00), 4);
  CHECK(f.A == Approx(0.5).margin(1e-6));
  CHECK(f.p == Approx(0.98).margin(1e-6));
  CHECK(f.B == Approx(0.5).margin(1e-6));
  CHECK(f.r == Approx(0.75 * 0.02).margin(1e-6));

  const auto flat = fit_decay(synthetic(0.75, 1.0, 0.25, {1, 2, 4, 8}, RbObservable::P00), 4);
  CHECK(flat.p == Approx(1.0).margin(1e-9));
  CHECK(flat.r == Approx(0.0).margin(1e-9));

  CHECK(error_rate(0.97, 4) / error_rate(0.97, 2) == Approx(1.5));
  const auto z = fit_decay(synthetic(0.9, 0.95, 0.0, {1, 3, 6, 12, 24, 48}, RbObservable::Z1), 2);
  CHECK(z.p == Approx(0.95).margin(1e-6));
  CHECK(z.r == Approx(0.025).margin(1e-6));

  auto grow = synthetic(0.5, 1.02, 0.2, {1, 2, 4, 8, 16}, RbObservable::Z1);
  for (auto& s : grow.stderr_mean) s = 1e-4;
  CHECK_THROWS_MATCHES(fit_decay(grow, 2), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return has_code(e, Errc::NonDecaying); }));
  CHECK_THROWS_MATCHES(fit_decay(synthetic(0.5, 0.9, 0.5, {1, 2, 4}, RbObservable::P00), 4), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return has_code(e, Errc::InsufficientData); }));
  auto bad = synthetic(0.5, 0.9, 0.5, {1, 2, 4, 8}, RbObservable::P00);
  bad.lengths = {1, 4, 2, 8};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("interleaved and decoherence-limited fidelity formulas", "[rb]") {
  DecayFit a, b;
  a.p = b.p = 0.97;
  CHECK(interleaved_fidelity(a, b) == 1.0);
  a.p = 0.96;
  b.p = 0.948;
  CHECK(interleaved_fidelity(a, b) == Approx(1.0 - 0.75 * (0.012 / 0.96)).margin(1e-15));
  CHECK(interleaved_fidelity(a, b) == Approx(0.990625).margin(1e-12));

  CHECK(decoherence_limited_fidelity(NoiseModel::noiseless(), 40e-9) == 1.0);
  const auto paper = NoiseModel::paper_coherence();
  const double tau = 40e-9;
  const double sum = 1 / (2 * 26.35e-6) + 1 / 15.02e-6 + 1 / (2 * 17.0e-6) + 1 / 17.11e-6;
  CHECK(decoherence_limited_fidelity(paper, tau) == Approx(1 - 0.4 * tau * sum).margin(1e-15));
  CHECK(decoherence_limited_fidelity(paper, tau) == Approx(0.9972).margin(1e-4));
  NoiseModel limit = paper;
  limit.t2 = {2 * paper.t1[0], 2 * paper.t1[1]};
  CHECK(decoherence_limited_fidelity(limit, tau) == Approx(0.9984).margin(1e-4));
  CHECK_THROWS_AS(decoherence_limited_fidelity(paper, 0.0), Error);
}

TEST_CASE("RB sequences recover to the identity", "[rb]") {
  const auto& g = group();
  const auto dev = device(NoiseModel::noiseless());
  const std::size_t gate = g.index_of(ideal_iswap());
  for (int m : {1, 2, 5, 17}) {
    for (std::uint64_t s = 0; s < 4; ++s) {
      for (const std::size_t* inter : {static_cast<const std::size_t*>(nullptr), &gate}) {
        const auto idx = rb_clifford_sequence(g, m, s, inter);
        CHECK(idx.size() == static_cast<std::size_t>(inter ? 2 * m - 1 : m));
        auto u = ComplexMatrix::identity(4);
        for (auto i : idx) u = g[i].unitary * u;
        CHECK(global_phase_distance(u, ComplexMatrix::identity(4)) < 1e-8);
        const auto seq = rb_pulse_sequence(g, idx, {});
        CHECK(global_phase_distance(dev.coherent_unitary(seq.ops), ComplexMatrix::identity(4)) < 1e-8);
      }
      const auto c1 = sim_rb_sequence(g, m, s);
      const auto seq = sim_rb_pulse_sequence(g, c1);
      CHECK(global_phase_distance(dev.coherent_unitary(seq.ops), ComplexMatrix::identity(4)) < 1e-8);
    }
  }
  // Interleaved sequences share the random elements of the standard one.
  const auto a = rb_clifford_sequence(g, 6, 11);
  const auto b = rb_clifford_sequence(g, 6, 11, &gate);
  for (std::size_t i = 0; i + 1 < a.size(); ++i) CHECK(b[2 * i + 1] == a[i]);
}

TEST_CASE("noiseless and SPAM-limited RB", "[rb]") {
  const auto& g = group();
  RbOptions o;
  o.seeds_per_length = 4;
  o.shots = 0;
  const auto flat = run_standard_rb(device(NoiseModel::noiseless()), g, o);
  for (double v : flat.mean) CHECK(v == Approx(1.0).margin(1e-10));
  const auto ic = run_interleaved_rb(device(NoiseModel::noiseless()), g, o);
  for (std::size_t i = 0; i < o.lengths.size(); ++i) {
    CHECK(ic.standard.mean[i] == Approx(1.0).margin(1e-10));
    CHECK(ic.interleaved.mean[i] == Approx(1.0).margin(1e-10));
  }
  const auto sim = run_simultaneous_rb(device(NoiseModel::noiseless()), g, o);
  for (std::size_t i = 0; i < o.lengths.size(); ++i) {
    CHECK(sim.z1.mean[i] == Approx(1.0).margin(1e-10));
    CHECK(sim.z1z2.mean[i] == Approx(1.0).margin(1e-10));
  }

  NoiseModel spam;
  spam.set_readout_error(0.03);
  o.lengths = {1};
  const auto one = run_standard_rb(device(spam), g, o);
  CHECK(one.mean[0] == Approx(0.97 * 0.97).margin(1e-12));

  // P00 from counts agrees with the expectation identity.
  const auto dev = device(NoiseModel::paper_coherence());
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto r = dev.run_sequence(rb_pulse_sequence(g, rb_clifford_sequence(g, 9, s), {}), 1000, s);
    CHECK(r.p00() == Approx(r.counts[0] / 1000.0).margin(1e-12));
  }
}

TEST_CASE("depolarizing RB self-consistency", "[rb]") {
  const auto& g = group();
  // rho -> (1 - eps) rho + eps I/4 per Clifford: P00(m) = 3/4 (1 - eps)^m + 1/4.
  RbOptions exact;
  exact.shots = 0;
  exact.seeds_per_length = 2;
  for (double eps : {0.002, 0.01, 0.05}) {
    NoiseModel n;
    n.depol_per_clifford = eps;
    const auto c = run_standard_rb(device(n), g, exact);
    for (std::size_t i = 0; i < c.lengths.size(); ++i)
      CHECK(c.mean[i] == Approx(0.75 * std::pow(1 - eps, c.lengths[i]) + 0.25).margin(1e-10));
    const auto f = fit_decay(c, 4);
    CHECK(f.p == Approx(1 - eps).margin(1e-8));
    CHECK(f.r == Approx(0.75 * eps).margin(1e-8));

    RbOptions shots;
    shots.seed = 21;
    if (eps < 0.05) shots.lengths = kLong;
    const auto fs = fit_decay(run_standard_rb(device(n), g, shots), 4);
    CHECK(std::abs(fs.r / (0.75 * eps) - 1) < 0.1);
  }
}

TEST_CASE("interleaved RB recovers the injected gate error", "[rb]") {
  const auto& g = group();
  for (double eps : {0.01, 0.03}) {
    NoiseModel n;
    n.depol_2q = eps;
    RbOptions o;
    o.seed = 3;
    const auto c = run_interleaved_rb(device(n), g, o);
    const double f = interleaved_fidelity(fit_decay(c.standard, 4), fit_decay(c.interleaved, 4));
    // Average infidelity of a two-qubit depolarizing channel is 3 eps / 4.
    CHECK(std::abs((1 - f) / (0.75 * eps) - 1) < 0.2);
  }

  // Measured device coherence with the residual ZZ at the cancellation point.
  const auto dev = device(NoiseModel::paper_coherence(), -2 * kPi * 220e3);
  RbOptions o;
  o.seed = 8;
  const auto c = run_interleaved_rb(dev, g, o);
  const double f = interleaved_fidelity(fit_decay(c.standard, 4), fit_decay(c.interleaved, 4));
  CHECK(f > 0.995);
  CHECK(f < 0.999);
  CHECK(std::abs(f - 0.9970) < 0.002);
}

TEST_CASE("parallel RB matches the serial reference", "[rb]") {
  const auto& g = group();
  const auto dev = device(NoiseModel::paper_coherence(), -2 * kPi * 220e3);
  RbOptions o;
  o.lengths = {1, 3, 9, 20};
  o.seeds_per_length = 5;
  o.seed = 77;
  const auto a = run_standard_rb(dev, g, o), b = serial::run_standard_rb(dev, g, o);
  CHECK(a.samples == b.samples);
  CHECK(a.seeds == b.seeds);
  const auto c = run_interleaved_rb(dev, g, o), d = serial::run_interleaved_rb(dev, g, o);
  CHECK(c.standard.samples == d.standard.samples);
  CHECK(c.interleaved.samples == d.interleaved.samples);
  CHECK(c.standard.samples == a.samples);
  const auto e = run_simultaneous_rb(dev, g, o), f = serial::run_simultaneous_rb(dev, g, o);
  CHECK(e.z1.samples == f.z1.samples);
  CHECK(e.z1z2.samples == f.z1z2.samples);
  o.seed = 78;
  CHECK(run_standard_rb(dev, g, o).samples != a.samples);
}

TEST_CASE("simultaneous RB product rule", "[rb]") {
  const auto& g = group();
  RbOptions o;
  o.seed = 5;
  NoiseModel n;
  n.depol_1q = 0.005;
  const auto c = run_simultaneous_rb(device(n), g, o);
  const auto a = fit_decay(c.z1, 2), b = fit_decay(c.z2, 2), z = fit_decay(c.z1z2, 4);
  const double sigma =
      std::sqrt(std::pow(a.p_err * b.p, 2) + std::pow(b.p_err * a.p, 2) + std::pow(z.p_err, 2));
  CHECK(std::abs(a.p * b.p - z.p) < 1.96 * sigma);

  // A ZZ error twirled by local Cliffords decays the correlator as 1 - 8q/9
  // against (1 - 4q/3)^2 for the product, so correlated ZZ lifts p_zz above it.
  o.shots = 0;
  const auto zz = run_simultaneous_rb(device(NoiseModel::noiseless(), 2 * kPi * 2e6), g, o);
  const auto za = fit_decay(zz.z1, 2), zb = fit_decay(zz.z2, 2), zc = fit_decay(zz.z1z2, 4);
  CHECK(zc.p - za.p * zb.p > 5e-3);
}

TEST_CASE("JAZZ cross-Kerr measurement", "[jazz]") {
  CHECK(jazz_extract_gzz(1e6, 1e6) == 0.0);
  CHECK(jazz_extract_gzz(1e6, 1.2e6) == Approx(2 * kPi * 200e3));

  JazzOptions o;
  o.seed = 4;
  for (double sign : {1.0, -1.0}) {
    const double gzz = sign * 2 * kPi * 200e3;
    const auto dev = device(NoiseModel::paper_coherence(), gzz);
    const auto fg = run_jazz(dev, Q2State::Ground, o);
    const auto fe = run_jazz(dev, Q2State::Excited, o);
    CHECK(jazz_extract_gzz(fg.frequency_hz, fe.frequency_hz) == Approx(gzz).epsilon(0.05));
  }

  TrueGateParams t;
  t.detuning = {2 * kPi * 300e3, 0.0};
  const VirtualDevice det(t, NoiseModel::noiseless());
  const auto a = run_jazz(det, Q2State::Ground, o);
  const auto b = run_jazz(det, Q2State::Excited, o);
  CHECK(std::abs(jazz_extract_gzz(a.frequency_hz, b.frequency_hz)) < 2 * kPi * 5e3);

  // Residual ZZ at the cancellation point.
  o.shots = 0;
  const auto dev = device(NoiseModel::paper_coherence(), -2 * kPi * 220e3);
  const double g = jazz_extract_gzz(run_jazz(dev, Q2State::Ground, o).frequency_hz,
                                    run_jazz(dev, Q2State::Excited, o).frequency_hz);
  CHECK(g == Approx(-2 * kPi * 220e3).epsilon(1e-3));

  CHECK_THROWS_MATCHES(fit_ramsey(std::vector<double>(20, 0.0), std::vector<double>(20, 0.0)), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return has_code(e, Errc::InsufficientData); }));
  std::vector<double> t20, flat(20, 0.3);
  for (int i = 0; i < 20; ++i) t20.push_back(1e-7 * i);
  CHECK_THROWS_MATCHES(fit_ramsey(t20, flat), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return has_code(e, Errc::FitDiverged); }));
}
