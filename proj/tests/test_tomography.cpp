#include <catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "dtc/error.hpp"
#include "dtc/tomography.hpp"
#include "test_util.hpp"

using namespace dtc;
using Catch::Approx;

namespace {

ProcessMatrix depolarized_iswap(double eps) {
  std::vector<ComplexMatrix> ks;
  for (const auto& k : channels::depolarizing(eps, 2)) ks.push_back(k * ideal_iswap());
  return chi_from_kraus(ks);
}

// Independent channel action through Kraus operators.
ComplexMatrix kraus_action(const std::vector<ComplexMatrix>& ks, const ComplexMatrix& rho) {
  ComplexMatrix out(4, 4);
  for (const auto& k : ks) out += k * rho * adjoint(k);
  return out;
}

bool has_code(const Error& e, Errc c) { return e.code() == c; }

VirtualDevice device_with(double gzz, const NoiseModel& noise) {
  TrueGateParams t;
  t.residual_gzz = gzz;
  return VirtualDevice(t, noise);
}

const std::vector<Primitive> kIswap{ParametricPulse{}};

}  // namespace

TEST_CASE("tomography circuit set", "[tomo]") {
  const auto c = generate_tomography_circuits(kIswap);
  CHECK(c.size() == 576);
  CHECK(kTomoPreps * kTomoSettings == 576);
  // Prep 0 is the bare ground state.
  CHECK(std::get<Prep>(c[0].ops.front()).basis.empty());
  CHECK(max_abs_diff(tomo_prep_state(0), ComplexMatrix::diagonal({1, 0, 0, 0})) < 1e-15);

  // Every prep is a product of pure single-qubit states from the six-state set.
  std::set<std::array<long, 3>> bloch;
  for (int p = 0; p < kTomoPreps; ++p) {
    const auto rho = tomo_prep_state(p);
    for (std::size_t keep : {0u, 1u}) {
      const auto r = partial_trace(rho, {2, 2}, {keep});
      CHECK(trace(r * r).real() == Approx(1.0).margin(1e-12));
      if (keep == 0) {
        const std::array<long, 3> v{std::lround(trace(pauli::X() * r).real()), std::lround(trace(pauli::Y() * r).real()),
                                    std::lround(trace(pauli::Z() * r).real())};
        bloch.insert(v);
      }
    }
    CHECK(trace(rho * rho).real() == Approx(1.0).margin(1e-12));
  }
  CHECK(bloch.size() == 6);

  // The 16 settings x {Z1, Z2, Z1Z2} reach every non-identity two-qubit Pauli.
  std::set<int> reached;
  for (int m = 0; m < kTomoSettings; ++m) {
    const auto u = tomo_setting_unitary(m);
    for (const auto& z : {channels::embed(pauli::Z(), 0), channels::embed(pauli::Z(), 1),
                          tensor_product(pauli::Z(), pauli::Z())}) {
      const auto o = adjoint(u) * z * u;
      for (int k = 1; k < 16; ++k)
        if (std::abs(std::abs(trace(pauli::two(k) * o).real()) - 4.0) < 1e-9) reached.insert(k);
    }
  }
  CHECK(reached.size() == 15);
}

TEST_CASE("exact data reconstructs the ideal iSWAP", "[tomo]") {
  const auto th = chi_from_unitary(ideal_iswap());
  CHECK(trace(th.chi).real() == Approx(1.0).margin(1e-14));
  const auto r = reconstruct_chi(synthetic_tomography(th));
  CHECK(max_abs_diff(r.chi, th.chi) < 1e-8);
  CHECK(gate_fidelity(process_fidelity(r, th)) == Approx(1.0).margin(1e-12));
  CHECK_NOTHROW(r.validate());

  // Device with no noise gives the same process.
  const auto d = run_tomography(device_with(0.0, NoiseModel::noiseless()), kIswap, 0, 0);
  CHECK(gate_fidelity(process_fidelity(reconstruct_chi(d), th)) == Approx(1.0).margin(1e-9));
}

TEST_CASE("depolarized iSWAP round trip", "[tomo]") {
  const double eps = 0.01;
  const auto ch = depolarized_iswap(eps);
  std::vector<ComplexMatrix> ks;
  for (const auto& k : channels::depolarizing(eps, 2)) ks.push_back(k * ideal_iswap());
  const auto r = reconstruct_chi(synthetic_tomography(ch));
  CHECK(frobenius_norm(r.chi - ch.chi) < 1e-3);
  std::mt19937_64 rng(17);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto rho = testutil::random_density(4, rng);
    worst = std::max(worst, max_abs_diff(apply_chi(r, rho), kraus_action(ks, rho)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("CPTP constraints are active on noisy data", "[tomo]") {
  const auto dev = device_with(-2 * kPi * 220e3, NoiseModel::paper_coherence());
  const auto data = run_tomography(dev, kIswap, 1024, 5);
  const auto lin = linear_inversion_chi(data);
  const auto fit = reconstruct_chi(data);
  CHECK(lin.tp_violation < 1e-9);
  CHECK(min_eigenvalue(lin.chi) < -1e-3);
  CHECK(min_eigenvalue(fit.chi) >= -1e-8);
  CHECK(fit.tp_violation < 1e-6);
  CHECK_NOTHROW(fit.validate());
  CHECK(fit.cost >= 0.0);

  // Reconstruction does not depend on the Pauli ordering.
  ReconstructOptions o;
  std::iota(o.basis.begin(), o.basis.end(), 0);
  std::mt19937_64 rng(3);
  std::shuffle(o.basis.begin(), o.basis.end(), rng);
  const auto perm = reconstruct_chi(data, o);
  CHECK(perm.basis == o.basis);
  CHECK(max_abs_diff(perm.in_standard_order().chi, fit.chi) < 1e-8);

  TomographyDataset partial = data;
  partial.records.pop_back();
  CHECK_THROWS_MATCHES(reconstruct_chi(partial), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return has_code(e, Errc::InsufficientData); }));
}

TEST_CASE("Kraus decomposition", "[tomo]") {
  GateParams g;
  g.theta_1 = 0.03;
  g.phi_zz = -0.02;
  const auto u = iswap_unitary(g);
  const auto k = kraus_decompose(chi_from_unitary(u));
  CHECK(k[0].weight == Approx(1.0).margin(1e-12));
  CHECK(k[1].weight == Approx(0.0).margin(1e-12));
  CHECK(global_phase_distance(k[0].op, u) < 1e-10);

  const double eps = 0.02;
  const auto kd = kraus_decompose(depolarized_iswap(eps));
  // rho -> (1-eps) U rho U^+ + eps I/4 has chi = (1-eps) uu^+ + eps I/16.
  CHECK(kd[0].weight == Approx(1 - 15 * eps / 16).margin(1e-12));
  double total = 0.0;
  ComplexMatrix completeness(4, 4);
  for (std::size_t i = 0; i < kd.size(); ++i) {
    CHECK(kd[i].weight >= 0.0);
    if (i > 0) CHECK(kd[i].weight <= kd[i - 1].weight + 1e-15);
    total += kd[i].weight;
    completeness += kd[i].weight * (adjoint(kd[i].op) * kd[i].op);
  }
  CHECK(total == Approx(1.0).margin(1e-6));
  CHECK(max_abs_diff(completeness, ComplexMatrix::identity(4)) < 1e-6);

  ProcessMatrix bad = chi_from_unitary(u);
  bad.chi(5, 5) -= 0.01;
  CHECK_THROWS_MATCHES(kraus_decompose(bad), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return has_code(e, Errc::NotCP); }));
}

TEST_CASE("phi_zz extraction", "[tomo]") {
  CHECK(extract_phi_zz(ideal_iswap()) == Approx(0.0).margin(1e-15));
  GateParams g;
  g.theta_1 = 0.04;
  g.theta_2 = -0.07;
  g.phi_p = 0.3;
  g.phi_zz = 0.021;
  CHECK(extract_phi_zz(std::polar(1.0, 0.7) * iswap_unitary(g)) == Approx(0.021).margin(1e-12));
  CHECK_THROWS_MATCHES(extract_phi_zz(0.5 * ComplexMatrix::identity(4)), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return has_code(e, Errc::NotNearUnitary); }));

  const double gzz = -2 * kPi * 220e3, tau = 40e-9;
  auto measured = [&](double rate) {
    const auto d = run_tomography(device_with(rate, NoiseModel::paper_coherence()), kIswap, 0, 0);
    return extract_phi_zz(kraus_decompose(reconstruct_chi(d)).front().op);
  };
  const double neg = measured(gzz);
  CHECK(neg == Approx(gzz / 4 * tau).margin(2e-4));
  CHECK(neg == Approx(-0.0138).margin(1e-4));
  // Reported measurement -0.0119 +- 0.0023.
  CHECK(std::abs(neg - (-0.0119)) < 0.0023);
  CHECK(measured(-gzz) == Approx(-neg).margin(1e-6));
}

TEST_CASE("fidelity metrics", "[tomo]") {
  const auto a = chi_from_unitary(ideal_iswap());
  CHECK(process_fidelity(a, a) == Approx(1.0).margin(1e-14));
  CHECK(gate_fidelity(process_fidelity(a, a)) == Approx(1.0).margin(1e-14));
  const auto full = depolarized_iswap(1.0);
  CHECK(process_fidelity(a, full) == Approx(1.0 / 16).margin(1e-14));
  const auto b = depolarized_iswap(0.03);
  CHECK(process_fidelity(a, b) == Approx(process_fidelity(b, a)).margin(1e-12));
  CHECK(process_fidelity(a, b) == Approx(1 - 0.03 * 15.0 / 16).margin(1e-12));

  ProcessMatrix twice = a;
  twice.chi *= 2.0;
  CHECK_THROWS_MATCHES(process_fidelity(a, twice), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return has_code(e, Errc::ConventionMismatch); }));

  CHECK(gate_fidelity(1.0) == 1.0);
  CHECK(gate_fidelity(0.0) == Approx(0.2));
  CHECK_THROWS_AS(gate_fidelity(1.2), Error);
  CHECK_THROWS_AS(gate_fidelity(-0.1), Error);
  // Reported 99.827% gate fidelity corresponds to process fidelity 0.99784.
  CHECK(gate_fidelity(0.9978375) == Approx(0.99827).margin(1e-9));
}

TEST_CASE("bootstrap confidence intervals", "[tomo][bootstrap]") {
  const auto th = chi_from_unitary(ideal_iswap());
  const auto exact = synthetic_tomography(depolarized_iswap(0.01));
  const auto z = bootstrap_confidence(exact, th, 5, 1);
  CHECK(z.gate_fidelity.hi - z.gate_fidelity.lo == Approx(0.0).margin(1e-12));
  CHECK(z.phi_zz.hi - z.phi_zz.lo == Approx(0.0).margin(1e-12));

  const auto dev = device_with(-2 * kPi * 220e3, NoiseModel::paper_coherence());
  auto width = [&](std::uint64_t shots) {
    const auto b = bootstrap_confidence(run_tomography(dev, kIswap, shots, 9), th, 40, 2);
    return b.phi_zz.hi - b.phi_zz.lo;
  };
  const double w1 = width(1000), w4 = width(4000);
  CHECK(w1 / w4 == Approx(2.0).epsilon(0.35));

  const auto data = run_tomography(dev, kIswap, 2000, 4);
  const auto par = bootstrap_confidence(data, th, 8, 6);
  const auto ser = serial::bootstrap_confidence(data, th, 8, 6);
  CHECK(par.fidelities == ser.fidelities);
  CHECK(par.phi_zzs == ser.phi_zzs);
  CHECK(bootstrap_confidence(data, th).fidelities.size() == 100);
  CHECK_THROWS_AS(bootstrap_confidence(data, th, 1), Error);
}

TEST_CASE("Hinton table", "[tomo]") {
  const auto id = chi_from_unitary(ComplexMatrix::identity(4));
  const auto cells = hinton_export(id);
  CHECK(cells.size() == 256);
  int big = 0;
  for (const auto& c : cells)
    if (c.magnitude > 1e-12) {
      ++big;
      CHECK(c.row == "II");
      CHECK(c.col == "II");
      CHECK(c.magnitude == Approx(1.0));
    }
  CHECK(big == 1);
  for (const auto& c : hinton_export(depolarized_iswap(0.2))) CHECK(c.magnitude <= 1.0 + 1e-12);
  CHECK(pauli_label(7) == "XZ");
}
