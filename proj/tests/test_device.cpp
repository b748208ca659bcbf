#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dtc/device.hpp"
#include "dtc/error.hpp"
#include "dtc/model.hpp"
#include "test_util.hpp"

using namespace dtc;
using Catch::Approx;

namespace {
const cplx i_{0.0, 1.0};

PulseSequence seq(std::vector<Primitive> body, Measure m = {}) {
  PulseSequence s;
  s.ops.push_back(Prep{});
  for (auto& b : body) s.ops.push_back(std::move(b));
  s.ops.push_back(std::move(m));
  return s;
}

void check_density(const ComplexMatrix& rho) {
  CHECK(std::abs(trace(rho) - 1.0) < 1e-12);
  CHECK(is_hermitian(rho, 1e-12));
  CHECK(min_eigenvalue(rho) > -1e-10);
}

// State-vector oracle, written out independently of the library's gate code.
using Vec = std::array<cplx, 4>;
Vec sv_apply(const std::array<std::array<cplx, 4>, 4>& m, const Vec& v) {
  Vec out{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out[r] += m[r][c] * v[c];
  return out;
}
std::array<std::array<cplx, 4>, 4> sv_rotation(int axis, double angle, int q) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  std::array<std::array<cplx, 2>, 2> r;
  if (axis == 0) r = {{{c, -i_ * s}, {-i_ * s, c}}};
  else if (axis == 1) r = {{{c, -s}, {s, c}}};
  else r = {{{std::exp(-i_ * angle / 2.0), 0}, {0, std::exp(i_ * angle / 2.0)}}};
  std::array<std::array<cplx, 4>, 4> m{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int o = 0; o < 2; ++o) {
        if (q == 0) m[2 * a + o][2 * b + o] = r[a][b];
        else m[2 * o + a][2 * o + b] = r[a][b];
      }
  return m;
}
std::array<std::array<cplx, 4>, 4> sv_iswap(double tp, double pp, double t1, double t2, double pz) {
  std::array<std::array<cplx, 4>, 4> m{};
  m[0][0] = 1;
  m[1][1] = std::exp(i_ * t2) * std::cos(tp);
  m[1][2] = i_ * std::exp(i_ * (t2 + pp)) * std::sin(tp);
  m[2][1] = i_ * std::exp(i_ * (t1 - pp)) * std::sin(tp);
  m[2][2] = std::exp(i_ * t1) * std::cos(tp);
  m[3][3] = std::exp(i_ * (t1 + t2 + pz));
  return m;
}
}  // namespace

TEST_CASE("reset with preparation errors") {
  NoiseModel n;
  VirtualDevice ideal(TrueGateParams{}, n);
  CHECK(max_abs_diff(ideal.reset(), ComplexMatrix::diagonal({1, 0, 0, 0})) == 0.0);
  n.prep_error = {0.01, 0.02};
  VirtualDevice d(TrueGateParams{}, n);
  const auto rho = d.reset();
  CHECK(rho(0, 0).real() == Approx(0.9702));
  CHECK(rho(1, 1).real() == Approx(0.0198));
  CHECK(rho(2, 2).real() == Approx(0.0098));
  CHECK(rho(3, 3).real() == Approx(0.0002));
  CHECK(trace(rho).real() == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("noise model validation") {
  NoiseModel n = NoiseModel::paper_coherence();
  CHECK_NOTHROW(n.validate());
  n.t2[0] = 2.1 * n.t1[0];
  try {
    VirtualDevice d(TrueGateParams{}, n);
    FAIL("expected Unphysical");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Unphysical);
  }
  n = NoiseModel{};
  n.readout[0][0] = {0.9, 0.2};
  CHECK_THROWS_AS(n.validate(), Error);
}

TEST_CASE("decoherence channel") {
  NoiseModel n;
  n.t1 = {20e-6, 30e-6};
  n.t2 = {15e-6, 40e-6};
  VirtualDevice d(TrueGateParams{}, n);
  std::mt19937_64 rng(2);
  const auto rho = testutil::random_density(4, rng);
  CHECK(max_abs_diff(d.decohere(rho, 0.0), rho) == 0.0);

  SECTION("excited populations decay by 1/e at t = T1") {
    NoiseModel m;
    m.t1 = {10e-6, 10e-6};
    m.t2 = {20e-6, 20e-6};
    VirtualDevice e(TrueGateParams{}, m);
    const auto out = e.decohere(ComplexMatrix::diagonal({0, 0, 0, 1}), 10e-6);
    const double x = std::exp(-1.0);
    CHECK(out(3, 3).real() == Approx(x * x));
    CHECK(out(1, 1).real() == Approx(x * (1 - x)));
    CHECK(out(2, 2).real() == Approx(x * (1 - x)));
    CHECK(out(0, 0).real() == Approx((1 - x) * (1 - x)));
  }
  SECTION("matches the composed Kraus channels") {
    const double t = 3e-6;
    auto ref = rho;
    for (int q = 0; q < 2; ++q) {
      const double gamma = 1 - std::exp(-t / n.t1[q]);
      const double tphi = 1.0 / (1.0 / n.t2[q] - 0.5 / n.t1[q]);
      const double lambda = 1 - std::exp(-2 * t / tphi);
      std::vector<ComplexMatrix> ad, pd;
      for (const auto& k : channels::amplitude_damping(gamma)) ad.push_back(channels::embed(k, q));
      for (const auto& k : channels::phase_damping(lambda)) pd.push_back(channels::embed(k, q));
      ref = apply_channel(apply_channel(ref, ad), pd);
    }
    CHECK(max_abs_diff(d.decohere(rho, t), ref) < 1e-14);
  }
  SECTION("pure dephasing of the single-excitation coherence") {
    NoiseModel m;
    m.t2 = {12e-6, 18e-6};  // T1 infinite
    VirtualDevice e(TrueGateParams{}, m);
    const double r = 1.0 / std::sqrt(2.0);
    const auto psi = ComplexMatrix(4, 1, {0, r, r, 0});
    const auto rho0 = psi * adjoint(psi);
    const double t = 5e-6;
    const auto out = e.decohere(rho0, t);
    CHECK(out(1, 2).real() == Approx(0.5 * std::exp(-t * (1 / 12e-6 + 1 / 18e-6))).epsilon(1e-12));
  }
  SECTION("residual ZZ acts as exp(-i g t ZZ/4)") {
    TrueGateParams tp;
    tp.residual_gzz = -kTwoPi * 220e3;
    VirtualDevice e(tp, NoiseModel{});
    const double t = 1.3e-6;
    const auto zz = tensor_product(pauli::Z(), pauli::Z());
    const auto u = expm_hermitian(0.25 * tp.residual_gzz * zz, t);
    CHECK(max_abs_diff(e.decohere(rho, t), u * rho * adjoint(u)) < 1e-14);
  }
}

TEST_CASE("parametric pulse") {
  SECTION("zero amplitude leaves only decoherence") {
    NoiseModel n = NoiseModel::paper_coherence();
    VirtualDevice d(TrueGateParams{}, n);
    std::mt19937_64 rng(4);
    const auto rho = testutil::random_density(4, rng);
    CHECK(max_abs_diff(d.apply_iswap_pulse(rho, 0.0, 0.0), d.decohere(rho, 40e-9, false)) < 1e-15);
    CHECK_THROWS_AS(d.apply_iswap_pulse(rho, 1.6, 0.0), Error);
  }
  SECTION("ideal noiseless pulse is the iSWAP") {
    VirtualDevice d(TrueGateParams{}, NoiseModel{});
    const ComplexMatrix ref{{1, 0, 0, 0}, {0, 0, i_, 0}, {0, i_, 0, 0}, {0, 0, 0, 1}};
    std::mt19937_64 rng(4);
    const auto rho = testutil::random_density(4, rng);
    CHECK(max_abs_diff(d.apply_iswap_pulse(rho, 1.0, 0.0), ref * rho * adjoint(ref)) < 1e-15);
    const auto half = d.apply_iswap_pulse(d.apply_iswap_pulse(rho, 0.5, 0.0), 0.5, 0.0);
    CHECK(max_abs_diff(half, d.apply_iswap_pulse(rho, 1.0, 0.0)) < 1e-14);
  }
  SECTION("amplitude and duration scaling of the realized angles") {
    TrueGateParams tp;
    tp.gate = {kPi / 2 + 0.03, 0.01, 0.05, -0.02, 0.0};
    tp.residual_gzz = -kTwoPi * 220e3;
    VirtualDevice d(tp, NoiseModel{});
    const auto g = d.pulse_params({0.5, 0.2, 80e-9, 0.0});
    CHECK(g.theta_p == Approx((kPi / 2 + 0.03) * 0.5 * 2));
    CHECK(g.phi_p == Approx(0.21));
    CHECK(g.theta_1 == Approx(0.05 * 0.25 * 2));
    CHECK(g.theta_2 == Approx(-0.02 * 0.25 * 2));
    CHECK(g.phi_zz == Approx(-kTwoPi * 220e3 * 80e-9 / 4));
    CHECK(d.pulse_params({}).phi_zz == Approx(-0.0138230).epsilon(1e-5));
  }
}

TEST_CASE("detuned pulse reproduces the chevron") {
  VirtualDevice d(TrueGateParams{}, NoiseModel{});
  const double g = kPi / (2 * 40e-9);
  double worst = 0.0;
  for (double det = -6e7; det <= 6e7; det += 2e7)
    for (double t = 10e-9; t <= 120e-9; t += 10e-9) {
      const auto s = seq({SQRotation{kAxisX, kPi, 1}, ParametricPulse{1.0, 0.0, t, det}});
      const auto p = d.probabilities(s);
      worst = std::max(worst, std::abs(p[2] - chevron_population(g, det, t)));
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("measurement of simple sequences") {
  VirtualDevice d(TrueGateParams{}, NoiseModel{});
  const auto r0 = d.run_sequence(seq({}), 1000, 1);
  CHECK(r0.counts[0] == 1000);
  const auto r1 = d.run_sequence(seq({SQRotation{kAxisX, kPi, 1}}), 1000, 1);
  CHECK(r1.counts[1] == 1000);
  CHECK(r1.z1 == 1.0);
  CHECK(r1.z2 == -1.0);
  CHECK_THROWS_AS(d.run_sequence(PulseSequence{{SQRotation{}}}, 10, 1), Error);
  CHECK_THROWS_AS(d.run_sequence(PulseSequence{{Prep{}, Prep{}, Measure{}}}, 10, 1), Error);
}

TEST_CASE("shot sampling is deterministic and unbiased") {
  NoiseModel n = NoiseModel::paper_coherence();
  n.set_readout_error(0.03);
  n.prep_error = {0.02, 0.01};
  VirtualDevice d(TrueGateParams{}, n);
  const auto s = seq({SQRotation{kAxisY, 1.1, 0}, SQRotation{kAxisX, 0.7, 1, true}, ParametricPulse{}},
                     Measure{{SQRotation{kAxisX, kPi / 2, 0}}});
  const auto a = d.run_sequence(s, 5000, 77), b = d.run_sequence(s, 5000, 77);
  CHECK(a.counts == b.counts);
  CHECK(d.run_sequence(s, 5000, 78).counts != a.counts);
  const auto exact = d.expectation(s);
  for (std::uint64_t shots : {10000ull, 1000000ull}) {
    const auto r = d.run_sequence(s, shots, 9);
    CHECK(std::abs(r.z1 - exact.z1) < 5 * r.z1_err);
    CHECK(std::abs(r.z2 - exact.z2) < 5 * r.z2_err);
    CHECK(std::abs(r.z1z2 - exact.z1z2) < 5 * r.z1z2_err);
    CHECK(r.p00() == Approx(r.counts[0] / static_cast<double>(shots)).epsilon(1e-14));
    CHECK(r.counts[0] + r.counts[1] + r.counts[2] + r.counts[3] == static_cast<double>(shots));
  }
}

TEST_CASE("noiseless evolution matches a state-vector oracle") {
  TrueGateParams tp;
  tp.gate = {kPi / 2 + 0.02, 0.03, 0.05, -0.04, 0.01};
  VirtualDevice d(tp, NoiseModel{});
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> kind(0, 3), ax(0, 1), q(0, 1);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Primitive> body;
    Vec v{1, 0, 0, 0};
    for (int k = 0; k < 15; ++k) {
      switch (kind(rng)) {
        case 0: {
          const int a = ax(rng), t = q(rng);
          const double th = ang(rng);
          body.push_back(SQRotation{a == 0 ? kAxisX : kAxisY, th, t});
          v = sv_apply(sv_rotation(a, th, t), v);
          break;
        }
        case 1: {
          const double a1 = ang(rng), a2 = ang(rng);
          body.push_back(VirtualZ{a1, a2});
          v = sv_apply(sv_rotation(2, a1, 0), v);
          v = sv_apply(sv_rotation(2, a2, 1), v);
          break;
        }
        default: {
          const double amp = 0.5 + 0.5 * (k % 2), ph = ang(rng);
          body.push_back(ParametricPulse{amp, ph, 0.0, 0.0});
          const auto& g = tp.gate;
          v = sv_apply(sv_iswap(g.theta_p * amp, g.phi_p + ph, g.theta_1 * amp * amp, g.theta_2 * amp * amp, g.phi_zz), v);
        }
      }
    }
    const auto p = d.probabilities(seq(body));
    for (int i = 0; i < 4; ++i) CHECK(std::abs(p[i] - std::norm(v[i])) < 1e-10);
  }
}

TEST_CASE("noisy evolution keeps a valid density matrix") {
  NoiseModel n = NoiseModel::paper_coherence();
  n.depol_1q = 0.001;
  n.depol_2q = 0.004;
  n.depol_per_clifford = 0.01;
  n.prep_error = {0.02, 0.03};
  TrueGateParams tp;
  tp.residual_gzz = kTwoPi * 300e3;
  tp.detuning = {kTwoPi * 50e3, -kTwoPi * 20e3};
  tp.sq_over_rotation = {0.01, -0.02};
  VirtualDevice d(tp, n);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Primitive> body;
    for (int k = 0; k < 12; ++k) {
      body.push_back(SQRotation{kAxisX, ang(rng), k % 2, k % 3 == 1});
      body.push_back(ParametricPulse{0.8, ang(rng), 0.0, 0.0});
      body.push_back(Idle{1e-7});
      body.push_back(CliffordMark{});
    }
    check_density(d.evolve(seq(body)));
  }
}

TEST_CASE("lowered Clifford circuits keep their unitaries") {
  const CliffordGroup g;
  VirtualDevice d(TrueGateParams{}, NoiseModel{});
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
  for (int t = 0; t < 300; ++t) {
    const auto i = pick(rng);
    const auto ops = lower_terms(g.compile(i), GateCalibration{});
    CHECK(global_phase_distance(d.coherent_unitary(ops), g[i].unitary) < 1e-10);
    for (std::size_t k = 0; k < ops.size(); ++k)
      if (const auto* r = std::get_if<SQRotation>(&ops[k]); r && r->concurrent) {
        std::size_t j = k;
        while (j > 0 && std::holds_alternative<VirtualZ>(ops[j - 1])) --j;
        REQUIRE(j > 0);
        const auto* prev = std::get_if<SQRotation>(&ops[j - 1]);
        REQUIRE(prev != nullptr);
        CHECK(prev->qubit != r->qubit);
        CHECK_FALSE(prev->concurrent);
      }
  }
  // Calibration corrections follow every iSWAP.
  TrueGateParams tp;
  tp.gate.theta_1 = 0.05;
  tp.gate.theta_2 = -0.02;
  VirtualDevice stark(tp, NoiseModel{});
  const auto ops = lower_terms({GateTerm::iswap()}, GateCalibration{1.0, 0.0, -0.05, 0.02});
  CHECK(global_phase_distance(stark.coherent_unitary(ops), ideal_iswap()) < 1e-14);
}
