#include "dtc/device.hpp"

#include <algorithm>
#include <cmath>

#include "dtc/error.hpp"
#include "dtc/rng.hpp"

namespace dtc {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Amplitude damping then pure dephasing on one qubit, closed form on a 4x4 rho.
void damp_qubit(ComplexMatrix& rho, int q, double gamma, double lambda) {
  const std::size_t m = q == 0 ? 2 : 1;
  const double coh = std::sqrt((1.0 - gamma) * (1.0 - lambda));
  ComplexMatrix out(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const bool bi = i & m, bj = j & m;
      if (!bi && !bj)
        out(i, j) = rho(i, j) + gamma * rho(i | m, j | m);
      else if (bi && bj)
        out(i, j) = (1.0 - gamma) * rho(i, j);
      else
        out(i, j) = coh * rho(i, j);
    }
  rho = std::move(out);
}

}  // namespace

void NoiseModel::validate() const {
  for (int q = 0; q < 2; ++q) {
    if (!(t1[q] > 0.0) || !(t2[q] > 0.0)) throw Error(Errc::Unphysical, "coherence times must be positive");
    if (t2[q] > 2.0 * t1[q] * (1.0 + 1e-12)) throw Error(Errc::Unphysical, "T2 exceeds 2 T1");
    if (!is_probability(prep_error[q])) throw Error(Errc::OutOfRange, "prep error must be a probability");
    for (int s = 0; s < 2; ++s) {
      const auto& row = readout[q][s];
      if (!is_probability(row[0]) || !is_probability(row[1]) || std::abs(row[0] + row[1] - 1.0) > 1e-12)
        throw Error(Errc::OutOfRange, "readout confusion rows must be distributions");
    }
  }
  for (double p : {depol_1q, depol_2q, depol_per_clifford})
    if (!is_probability(p)) throw Error(Errc::OutOfRange, "depolarizing strength must be a probability");
  if (!(gate_duration_1q >= 0.0) || !(gate_duration_2q > 0.0)) throw Error(Errc::OutOfRange, "bad gate duration");
}

NoiseModel NoiseModel::paper_coherence() {
  NoiseModel n;
  n.t1 = {26.35e-6, 17.0e-6};
  n.t2 = {15.02e-6, 17.11e-6};
  return n;
}

void NoiseModel::set_readout_error(double e) {
  for (auto& q : readout) q = {{{1.0 - e, e}, {e, 1.0 - e}}};
}

void TrueGateParams::validate() const {
  const auto& g = gate;
  for (double v : {g.theta_p, g.phi_p, g.theta_1, g.theta_2, g.phi_zz, residual_gzz, detuning[0], detuning[1],
                   sq_over_rotation[0], sq_over_rotation[1]})
    if (!std::isfinite(v)) throw Error(Errc::OutOfRange, "device parameters must be finite");
}

void PulseSequence::validate() const {
  if (ops.size() < 2 || !std::holds_alternative<Prep>(ops.front()) || !std::holds_alternative<Measure>(ops.back()))
    throw Error(Errc::InvalidSequence, "sequence must begin with Prep and end with Measure");
  for (std::size_t i = 1; i + 1 < ops.size(); ++i)
    if (std::holds_alternative<Prep>(ops[i]) || std::holds_alternative<Measure>(ops[i]))
      throw Error(Errc::InvalidSequence, "Prep and Measure only at the ends");
}

MeasurementRecord MeasurementRecord::from_probabilities(const std::array<double, 4>& p) {
  MeasurementRecord r;
  r.counts = p;
  r.z1 = p[0] + p[1] - p[2] - p[3];
  r.z2 = p[0] - p[1] + p[2] - p[3];
  r.z1z2 = p[0] - p[1] - p[2] + p[3];
  return r;
}

MeasurementRecord MeasurementRecord::from_counts(const std::array<std::uint64_t, 4>& n, std::uint64_t seed) {
  const std::uint64_t total = n[0] + n[1] + n[2] + n[3];
  if (total == 0) throw Error(Errc::InsufficientData, "no shots");
  const double inv = 1.0 / static_cast<double>(total);
  MeasurementRecord r =
      from_probabilities({n[0] * inv, n[1] * inv, n[2] * inv, n[3] * inv});
  for (int i = 0; i < 4; ++i) r.counts[i] = static_cast<double>(n[i]);
  r.shots = total;
  r.seed = seed;
  auto err = [&](double z) { return std::sqrt(std::max(0.0, 1.0 - z * z) * inv); };
  r.z1_err = err(r.z1);
  r.z2_err = err(r.z2);
  r.z1z2_err = err(r.z1z2);
  return r;
}

std::vector<Primitive> lower_terms(const std::vector<GateTerm>& terms, const GateCalibration& cal) {
  std::vector<Primitive> out;
  std::array<std::vector<GateTerm>, 2> run;
  auto flush = [&]() {
    std::array<std::size_t, 2> pos{0, 0};
    auto emit_vz = [&](int q) {
      while (pos[q] < run[q].size() && run[q][pos[q]].kind == GateTerm::Kind::VirtualZ) {
        const double a = run[q][pos[q]++].angle;
        out.push_back(q == 0 ? VirtualZ{a, 0.0} : VirtualZ{0.0, a});
      }
    };
    while (pos[0] < run[0].size() || pos[1] < run[1].size()) {
      bool pulsed = false;
      for (int q = 0; q < 2; ++q) {
        emit_vz(q);
        if (pos[q] < run[q].size()) {
          const auto& t = run[q][pos[q]++];
          out.push_back(SQRotation{t.axis, t.angle, q, pulsed});
          pulsed = true;
        }
      }
    }
    run[0].clear();
    run[1].clear();
  };
  for (const auto& t : terms) {
    if (t.kind == GateTerm::Kind::ISwap) {
      flush();
      out.push_back(ParametricPulse{cal.amplitude, cal.phase, 0.0, 0.0});
      if (cal.vz1 != 0.0 || cal.vz2 != 0.0) out.push_back(VirtualZ{cal.vz1, cal.vz2});
    } else {
      run.at(t.qubit).push_back(t);
    }
  }
  flush();
  return out;
}

VirtualDevice::VirtualDevice(TrueGateParams truth, NoiseModel noise) : truth_(truth), noise_(noise) {
  truth_.validate();
  noise_.validate();
}

ComplexMatrix VirtualDevice::reset() const {
  const double e1 = noise_.prep_error[0], e2 = noise_.prep_error[1];
  return ComplexMatrix::diagonal({(1 - e1) * (1 - e2), (1 - e1) * e2, e1 * (1 - e2), e1 * e2});
}

ComplexMatrix VirtualDevice::idle_unitary(double t) const {
  // H = -(d1/2) Z1 - (d2/2) Z2 + (g/4) Z1 Z2
  std::vector<cplx> d(4);
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2) {
      const double z1 = s1 ? -1.0 : 1.0, z2 = s2 ? -1.0 : 1.0;
      const double e = -0.5 * truth_.detuning[0] * z1 - 0.5 * truth_.detuning[1] * z2 + 0.25 * truth_.residual_gzz * z1 * z2;
      d[2 * s1 + s2] = std::polar(1.0, -e * t);
    }
  return ComplexMatrix::diagonal(d);
}

ComplexMatrix VirtualDevice::decohere(const ComplexMatrix& rho, double t, bool with_zz) const {
  if (!(t >= 0.0)) throw Error(Errc::OutOfRange, "duration must be nonnegative");
  if (t == 0.0) return rho;
  ComplexMatrix out = rho;
  for (int q = 0; q < 2; ++q) {
    const double t1 = noise_.t1[q], t2 = noise_.t2[q];
    const double gamma = std::isinf(t1) ? 0.0 : -std::expm1(-t / t1);
    const double rate_phi = (std::isinf(t2) ? 0.0 : 1.0 / t2) - (std::isinf(t1) ? 0.0 : 0.5 / t1);
    if (rate_phi < -1e-9 * (1.0 / std::min(t1, t2))) throw Error(Errc::Unphysical, "T2 exceeds 2 T1");
    const double lambda = rate_phi > 0.0 ? -std::expm1(-2.0 * t * rate_phi) : 0.0;
    if (gamma > 0.0 || lambda > 0.0) damp_qubit(out, q, gamma, lambda);
  }
  if (with_zz) out = conjugate(idle_unitary(t), out);
  return out;
}

GateParams VirtualDevice::pulse_params(const ParametricPulse& p) const {
  const double tau = noise_.gate_duration_2q;
  const double t = p.duration > 0.0 ? p.duration : tau;
  const double a = p.amplitude;
  GateParams g;
  g.theta_p = truth_.gate.theta_p * a * t / tau;
  g.phi_p = truth_.gate.phi_p + p.phase;
  g.theta_1 = truth_.gate.theta_1 * a * a * t / tau;
  g.theta_2 = truth_.gate.theta_2 * a * a * t / tau;
  g.phi_zz = truth_.gate.phi_zz * t / tau + 0.25 * truth_.residual_gzz * t;
  return g;
}

ComplexMatrix VirtualDevice::pulse_unitary(const ParametricPulse& p) const {
  const auto g = pulse_params(p);
  if (p.detuning == 0.0) return iswap_unitary(g);
  const double t = p.duration > 0.0 ? p.duration : noise_.gate_duration_2q;
  const double rate = g.theta_p / t;
  const ComplexMatrix h{{0.0, -rate * std::polar(1.0, g.phi_p)}, {-rate * std::polar(1.0, -g.phi_p), p.detuning}};
  const auto b = expm_hermitian(h, t);
  ComplexMatrix u(4, 4);
  u(0, 0) = 1.0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) u(1 + r, 1 + c) = b(r, c);
  u(3, 3) = std::polar(1.0, g.phi_zz);
  return virtual_z(g.theta_1, g.theta_2) * u;
}

ComplexMatrix VirtualDevice::apply_iswap_pulse(const ComplexMatrix& rho, double amplitude, double phase) const {
  if (!(amplitude >= 0.0 && amplitude <= 1.5)) throw Error(Errc::OutOfRange, "amplitude scale must lie in [0, 1.5]");
  ParametricPulse p{amplitude, phase, 0.0, 0.0};
  auto out = conjugate(pulse_unitary(p), rho);
  if (noise_.depol_2q > 0.0) out = apply_kraus_unchecked(out, channels::depolarizing(noise_.depol_2q, 2));
  return decohere(out, noise_.gate_duration_2q, false);
}

ComplexMatrix VirtualDevice::sq_unitary(const SQRotation& r) const {
  return single_qubit_rotation(r.axis, r.angle * (1.0 + truth_.sq_over_rotation.at(r.qubit)), r.qubit);
}

ComplexMatrix VirtualDevice::evolve(const PulseSequence& seq) const {
  seq.validate();
  auto rho = reset();
  double pending = 0.0;
  auto flush = [&]() {
    if (pending > 0.0) rho = decohere(rho, pending, true);
    pending = 0.0;
  };
  const auto dep1 = channels::depolarizing(noise_.depol_1q, 1);
  std::array<std::vector<ComplexMatrix>, 2> dep1q;
  for (int q = 0; q < 2; ++q)
    for (const auto& k : dep1) dep1q[q].push_back(channels::embed(k, q));
  const auto dep2 = channels::depolarizing(noise_.depol_2q, 2);
  const auto depc = channels::depolarizing(noise_.depol_per_clifford, 2);

  for (const auto& op : seq.ops) {
    std::visit(Overloaded{
                   [&](const Prep& p) {
                     for (const auto& r : p.basis) rho = conjugate(single_qubit_rotation(r.axis, r.angle, r.qubit), rho);
                   },
                   [&](const SQRotation& r) {
                     if (!r.concurrent) flush();
                     rho = conjugate(sq_unitary(r), rho);
                     if (noise_.depol_1q > 0.0) rho = apply_kraus_unchecked(rho, dep1q[r.qubit]);
                     pending = noise_.gate_duration_1q;
                   },
                   [&](const VirtualZ& v) { rho = conjugate(virtual_z(v.angle1, v.angle2), rho); },
                   [&](const ParametricPulse& p) {
                     flush();
                     rho = conjugate(pulse_unitary(p), rho);
                     if (noise_.depol_2q > 0.0) rho = apply_kraus_unchecked(rho, dep2);
                     rho = decohere(rho, p.duration > 0.0 ? p.duration : noise_.gate_duration_2q, false);
                   },
                   [&](const Idle& i) {
                     flush();
                     rho = decohere(rho, i.duration, true);
                   },
                   [&](const CliffordMark&) {
                     if (noise_.depol_per_clifford > 0.0) {
                       flush();
                       rho = apply_kraus_unchecked(rho, depc);
                     }
                   },
                   [&](const Measure& m) {
                     flush();
                     for (const auto& r : m.basis) rho = conjugate(single_qubit_rotation(r.axis, r.angle, r.qubit), rho);
                   },
               },
               op);
  }
  return rho;
}

std::array<double, 4> VirtualDevice::probabilities(const PulseSequence& seq) const {
  const auto rho = evolve(seq);
  std::array<double, 4> p{};
  for (int i = 0; i < 4; ++i) p[i] = std::max(0.0, rho(i, i).real());
  const auto& r = noise_.readout;
  std::array<double, 4> out{};
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2)
      for (int m1 = 0; m1 < 2; ++m1)
        for (int m2 = 0; m2 < 2; ++m2) out[2 * m1 + m2] += p[2 * s1 + s2] * r[0][s1][m1] * r[1][s2][m2];
  const double total = out[0] + out[1] + out[2] + out[3];
  for (auto& x : out) x /= total;
  return out;
}

MeasurementRecord VirtualDevice::expectation(const PulseSequence& seq) const {
  return MeasurementRecord::from_probabilities(probabilities(seq));
}

MeasurementRecord VirtualDevice::run_sequence(const PulseSequence& seq, std::uint64_t shots, std::uint64_t seed) const {
  if (shots == 0) {
    auto r = expectation(seq);
    r.seed = seed;
    return r;
  }
  const auto p = probabilities(seq);
  auto rng = make_rng(seed);
  std::array<std::uint64_t, 4> n{};
  std::uint64_t left = shots;
  double mass = 1.0;
  for (int i = 0; i < 3 && left > 0; ++i) {
    const double q = mass > 0.0 ? std::clamp(p[i] / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> b(left, q);
    n[i] = b(rng);
    left -= n[i];
    mass -= p[i];
  }
  n[3] += left;
  return MeasurementRecord::from_counts(n, seed);
}

ComplexMatrix VirtualDevice::coherent_unitary(const std::vector<Primitive>& ops) const {
  auto u = ComplexMatrix::identity(4);
  for (const auto& op : ops) {
    std::visit(Overloaded{
                   [&](const SQRotation& r) { u = sq_unitary(r) * u; },
                   [&](const VirtualZ& v) { u = virtual_z(v.angle1, v.angle2) * u; },
                   [&](const ParametricPulse& p) { u = pulse_unitary(p) * u; },
                   [&](const Prep& p) {
                     for (const auto& r : p.basis) u = single_qubit_rotation(r.axis, r.angle, r.qubit) * u;
                   },
                   [&](const Measure& m) {
                     for (const auto& r : m.basis) u = single_qubit_rotation(r.axis, r.angle, r.qubit) * u;
                   },
                   [&](const auto&) {},
               },
               op);
  }
  return u;
}

}  // namespace dtc
