#include <catch_amalgamated.hpp>

#include <cmath>

#include "dtc/error.hpp"
#include "dtc/model.hpp"

using namespace dtc;
using Catch::Approx;

namespace {
constexpr double GHz = kTwoPi * 1e9;
constexpr double MHz = kTwoPi * 1e6;

// Default circuit evaluated by hand in GHz units.
struct HandProfile {
  double w1 = 4.91, w2 = 5.16;
  double wc = std::sqrt(8 * 14.6 * 0.15) - 0.15;
  double c1 = 19370.1 / 172.0, c2 = 19370.1 / 164.0, cc = 19370.1 / 150.0;
  double g13 = 13.5 * std::sqrt(4.91 * wc) / (2 * std::sqrt((c1 + 13.5) * (cc + 13.5)));
  double g24 = 13.9 * std::sqrt(5.16 * wc) / (2 * std::sqrt((c2 + 13.9) * (cc + 13.9)));
  double gc = -7.91 * wc / (2 * (cc + 7.91));
  double gl(double phi) const { return 4 * 5.8 * std::cos(2 * kPi * phi) * 0.15 / wc; }
};
}  // namespace

TEST_CASE("default profile reproduces the circuit numbers") {
  const auto p = default_device_params();
  HandProfile h;
  CHECK(p.omega[2] / GHz == Approx(4.03569).epsilon(1e-5));
  CHECK(p.g13 / GHz == Approx(h.g13).epsilon(1e-12));
  CHECK(p.g24 / GHz == Approx(h.g24).epsilon(1e-12));
  CHECK(p.gC / GHz == Approx(h.gc).epsilon(1e-12));
  CHECK(p.alpha[0] / MHz == Approx(-172.0));
  CHECK(p.alpha[1] / MHz == Approx(-164.0));
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("inductive coupling") {
  const auto p = default_device_params();
  HandProfile h;
  CHECK(std::abs(inductive_coupling(p, {0.25})) < 1e-6 * GHz);
  CHECK(inductive_coupling(p, {0.0}) == Approx(inductive_coupling(p, {1.0})));
  CHECK(inductive_coupling(p, {0.1}) / GHz == Approx(h.gl(0.1)).epsilon(1e-12));
  for (double phi : {0.03, 0.17, 0.41, 0.77}) {
    CHECK(inductive_coupling(p, {phi}) == Approx(inductive_coupling(p, {-phi})));
    CHECK(inductive_coupling(p, {phi}) == Approx(inductive_coupling(p, {phi + 1.0})));
  }
}

TEST_CASE("flux point canonicalization") {
  CHECK(FluxPoint::canonical(1.25).phi_c == Approx(0.25));
  CHECK(FluxPoint::canonical(-0.25).phi_c == Approx(0.75));
  CHECK(FluxPoint::canonical(0.0).phi_c == 0.0);
  CHECK_THROWS_AS(FluxPoint::canonical(NAN), Error);
}

TEST_CASE("effective coupling against a scalar evaluation") {
  const auto p = default_device_params();
  HandProfile h;
  const double phi = 0.2;
  const double gl = h.gl(phi), j = h.gc - gl, wbar = h.wc;
  double ref = 0.0;
  for (double dj : {h.w1 - wbar, h.w2 - wbar}) {
    const double d2 = dj * dj - j * j;
    ref += j * (1.0 + (h.gc + gl) / j * dj / wbar) / (2.0 * d2);
  }
  ref *= h.g13 * h.g24;
  CHECK(effective_coupling(p, {phi}) / GHz == Approx(ref).epsilon(1e-10));
}

TEST_CASE("effective coupling changes sign across the root") {
  const auto p = default_device_params();
  const auto root = find_cancellation_flux(p, CancellationObjective::GeffRoot, 0.26, 0.36);
  CHECK(std::abs(effective_coupling(p, {root.phi_c})) < 1e-3 * std::abs(effective_coupling(p, {0.2})));
  const double below = effective_coupling(p, {root.phi_c - 0.01});
  const double above = effective_coupling(p, {root.phi_c + 0.01});
  CHECK(below * above < 0.0);
  CHECK(root.phi_c > 0.28);
  CHECK(root.phi_c < 0.36);
}

TEST_CASE("leading coupling term vanishes where g_L equals g_C") {
  auto p = default_device_params();
  p.gC = std::abs(p.gC);  // g_L reaches +g_C below a quarter flux quantum
  const double amp = inductive_coupling(p, {0.0});
  const double phi = std::acos(p.gC / amp) / kTwoPi;
  REQUIRE(inductive_coupling(p, {phi}) == Approx(p.gC).epsilon(1e-12));
  const double wbar = p.omega[2];
  double ref = 0.0;
  for (double dj : {p.omega[0] - wbar, p.omega[1] - wbar}) ref += 2.0 * p.gC * dj / wbar / (2.0 * dj * dj);
  ref *= p.g13 * p.g24;
  CHECK(effective_coupling(p, {phi}) == Approx(ref).epsilon(1e-8));
}

TEST_CASE("degenerate denominator is reported") {
  auto p = default_device_params();
  p.omega[0] = p.omega[2] + 1e-9;  // Q1 on resonance with the coupler
  p.gC = 0.0;
  p.EJ5 = 0.0;
  try {
    effective_coupling(p, {0.1});
    FAIL("expected DegenerateDenominator");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateDenominator);
  }
}

TEST_CASE("symmetric toy with no capacitive coupling cancels at a quarter flux quantum") {
  auto p = default_device_params();
  p.gC = 0.0;
  const auto root = find_cancellation_flux(p, CancellationObjective::GeffRoot, 0.1, 0.4);
  CHECK(root.phi_c == Approx(0.25).margin(1e-6));
  CHECK_THROWS_AS(find_cancellation_flux(p, CancellationObjective::GeffRoot, 0.3, 0.4), Error);
}

TEST_CASE("perturbative ZZ") {
  const auto p = default_device_params();
  const double g = effective_coupling(p, {0.2});
  const double d = p.omega[0] - p.omega[1];
  const double ref = 2 * g * g * (p.alpha[0] + p.alpha[1]) / ((d - p.alpha[0]) * (d + p.alpha[1]));
  const auto z = zz_perturbative(p, {0.2});
  CHECK(z.method == ZzMethod::Perturbative);
  CHECK(z.gzz == Approx(ref).epsilon(1e-12));
  const double sign = ((p.alpha[0] + p.alpha[1]) * (d - p.alpha[0]) * (d + p.alpha[1])) > 0 ? 1.0 : -1.0;
  for (double phi : {0.1, 0.2, 0.3, 0.4}) CHECK(zz_perturbative(p, {phi}).gzz * sign > 0.0);

  auto toy = p;
  toy.gC = 0.0;
  CHECK(std::abs(zz_perturbative(toy, {0.25}).gzz) < 1e-20 * GHz);

  auto pole = p;
  pole.omega[1] = pole.omega[0] - pole.alpha[0];
  try {
    zz_perturbative(pole, {0.2});
    FAIL("expected StraddlePole");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::StraddlePole);
  }
}

TEST_CASE("Hamiltonian structure") {
  auto p = default_device_params();
  SECTION("uncoupled two-level limit") {
    auto q = p;
    q.levels_per_mode = 2;
    q.g13 = q.g24 = q.gC = q.EJ5 = 0.0;
    auto h = build_hamiltonian(q, {0.3});
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) {
            const auto i = fock_index(q, a, b, c, d);
            CHECK(h(i, i).real() == Approx(a * q.omega[0] + b * q.omega[1] + c * q.omega[2] + d * q.omega[3]));
          }
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t j = 0; j < h.cols(); ++j)
        if (i != j) CHECK(h(i, j) == cplx{});
  }
  SECTION("Duffing ladder") {
    auto q = p;
    q.levels_per_mode = 3;
    auto h = build_hamiltonian(q, {0.3});
    const auto i = fock_index(q, 2, 0, 0, 0);
    CHECK(h(i, i).real() == Approx(2 * q.omega[0] + q.alpha[0]));
  }
  SECTION("Hermitian, excitation number conserved without counter-rotating terms") {
    auto q = p;
    q.counter_rotating = false;
    q.levels_per_mode = 3;
    auto h = build_hamiltonian(q, {0.17});
    CHECK(is_hermitian(h, 0.0));
    std::vector<cplx> nvals(h.rows());
    std::vector<cplx> parity(h.rows());
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d) {
            nvals[fock_index(q, a, b, c, d)] = a + b + c + d;
            parity[fock_index(q, a, b, c, d)] = ((a + b + c + d) % 2) ? -1.0 : 1.0;
          }
    auto n = ComplexMatrix::diagonal(nvals);
    CHECK(frobenius_norm(h * n - n * h) < 1e-6 * frobenius_norm(h));
    q.counter_rotating = true;
    auto hc = build_hamiltonian(q, {0.17});
    CHECK(frobenius_norm(hc * n - n * hc) > 1e-3 * frobenius_norm(hc));
    auto par = ComplexMatrix::diagonal(parity);
    CHECK(frobenius_norm(hc * par - par * hc) < 1e-6 * frobenius_norm(hc));
  }
  SECTION("dimension limit") {
    auto q = p;
    q.levels_per_mode = 6;
    try {
      build_hamiltonian(q, {0.1});
      FAIL("expected DimensionTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DimensionTooLarge);
    }
  }
}

TEST_CASE("spectral ZZ of uncoupled modes is zero") {
  auto p = default_device_params();
  p.g13 = p.g24 = 0.0;
  const auto z = zz_spectral(p, {0.2});
  CHECK(std::abs(z.gzz) < 1e-13 * p.omega[0]);
  CHECK(z.method == ZzMethod::Spectral);
  CHECK(z.gzz == Approx(z.energies[3] - z.energies[2] - z.energies[1] + z.energies[0]).margin(1e-9));
}

TEST_CASE("spectral ZZ with a two-level coupler cancels exactly") {
  auto p = default_device_params();
  p.coupler_levels = 2;
  const auto m = find_cancellation_flux(p, CancellationObjective::MinAbsGzzSpectral, 0.22, 0.36);
  const double off = std::abs(zz_spectral(p, {0.2}).gzz);
  CHECK(std::abs(zz_spectral(p, m).gzz) < 1e-3 * off);
}

TEST_CASE("perturbative and spectral ZZ agree with the coupler far above the qubits") {
  auto p = with_coupler_frequency(default_device_params(), kTwoPi * 7.5e9);
  p.g13 = p.g24 = kTwoPi * 40e6;
  const double drsb = std::abs(p.omega[0] - p.omega[1]);
  for (double phi : {0.1, 0.15, 0.4, 0.45}) {
    const double g = effective_coupling(p, {phi});
    REQUIRE(std::abs(g) < 0.02 * drsb);
    const double a = zz_perturbative(p, {phi}).gzz;
    const double b = zz_spectral(p, {phi}).gzz;
    CHECK(std::abs(a - b) < 0.25 * std::abs(b));
  }
}

TEST_CASE("ambiguous labels near a coupler resonance") {
  auto p = with_coupler_frequency(default_device_params(), kTwoPi * 4.91e9);
  p.alpha[2] = p.alpha[3] = -kTwoPi * 400e6;
  p.g13 = p.g24 = kTwoPi * 300e6;
  CHECK_THROWS_AS(zz_spectral(p, {0.25}), Error);
}

TEST_CASE("parametric coupling") {
  const auto p = default_device_params();
  CHECK(parametric_coupling(p, 0.0) == 0.0);
  CHECK(parametric_coupling(p, 0.2) == Approx(2.0 * parametric_coupling(p, 0.1)));
  const double g = parametric_coupling(p, 0.25);
  CHECK(g == Approx(kPi / (2.0 * 40e-9)).epsilon(1e-12));
  CHECK_THROWS_AS(parametric_coupling(p, -0.1), Error);
}

namespace {
// |<10| exp(-i H t) |01>|^2 with H = [[0, g], [g, detuning]] on (|01>, |10>).
double chevron_oracle(double g, double detuning, double t) {
  ComplexMatrix h{{0.0, g}, {g, detuning}};
  auto u = expm_hermitian(h, t);
  return std::norm(u(1, 0));
}
}  // namespace

TEST_CASE("chevron closed form") {
  const double g = kPi / (2 * 40e-9);
  CHECK(chevron_population(g, 0.0, kPi / (2 * g)) == Approx(1.0).epsilon(1e-14));
  CHECK(chevron_population(g, 3e7, 0.0) == 0.0);
  CHECK_THROWS_AS(chevron_population(g, 0.0, -1.0), Error);
  double worst = 0.0;
  for (double d = -8e7; d <= 8e7; d += 1e7)
    for (double t = 0.0; t <= 200e-9; t += 10e-9)
      worst = std::max(worst, std::abs(chevron_population(g, d, t) - chevron_oracle(g, d, t)));
  CHECK(worst < 1e-10);
}

TEST_CASE("parallel flux sweep matches the serial reference") {
  auto p = default_device_params();
  p.levels_per_mode = 3;
  std::vector<double> phis{0.1, 0.2, 0.3, 0.4};
  auto a = flux_sweep(p, phis);
  auto b = serial::flux_sweep(p, phis);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].phi_c == b[i].phi_c);
    CHECK(a[i].g_eff == b[i].g_eff);
    CHECK(a[i].g_zz_pert == b[i].g_zz_pert);
    CHECK(a[i].g_zz_spec == b[i].g_zz_spec);
  }
}
