#include "dtc/gates.hpp"

#include <cmath>
#include <deque>
#include <optional>

#include "dtc/error.hpp"

namespace dtc {

namespace {

double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  return a <= -kPi ? a + kTwoPi : a;
}

}  // namespace

GateParams GateParams::canonical() const {
  GateParams g = *this;
  double tp = std::fmod(theta_p, kTwoPi);
  if (tp < 0.0) tp += kTwoPi;
  if (tp > kPi) {
    // theta_p + pi flips both block diagonals and both off-diagonals.
    tp -= kPi;
    g.theta_1 += kPi;
    g.theta_2 += kPi;
  }
  g.theta_p = tp;
  g.phi_p = wrap_angle(g.phi_p);
  g.theta_1 = wrap_angle(g.theta_1);
  g.theta_2 = wrap_angle(g.theta_2);
  g.phi_zz = wrap_angle(g.phi_zz);
  return g;
}

ComplexMatrix iswap_unitary(const GateParams& g) {
  const double c = std::cos(g.theta_p), s = std::sin(g.theta_p);
  ComplexMatrix u(4, 4);
  u(0, 0) = 1.0;
  u(1, 1) = std::polar(c, g.theta_2);
  u(1, 2) = kI * std::polar(s, g.theta_2 + g.phi_p);
  u(2, 1) = kI * std::polar(s, g.theta_1 - g.phi_p);
  u(2, 2) = std::polar(c, g.theta_1);
  u(3, 3) = std::polar(1.0, g.theta_1 + g.theta_2 + g.phi_zz);
  return u;
}

ComplexMatrix ideal_iswap() { return iswap_unitary(GateParams::ideal()); }

ComplexMatrix rotation(const Axis& n, double angle) {
  const double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  if (!(std::abs(norm - 1.0) <= 1e-9)) throw Error(Errc::BadAxis, "rotation axis must be a unit vector");
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return ComplexMatrix{{cplx(c, -s * n[2]), cplx(-s * n[1], -s * n[0])},
                       {cplx(s * n[1], -s * n[0]), cplx(c, s * n[2])}};
}

ComplexMatrix single_qubit_rotation(const Axis& axis, double angle, int target) {
  if (target != 0 && target != 1) throw Error(Errc::OutOfRange, "target must be 0 or 1");
  return channels::embed(rotation(axis, angle), target);
}

ComplexMatrix virtual_z(double angle1, double angle2) {
  return ComplexMatrix::diagonal({1.0, std::polar(1.0, angle2), std::polar(1.0, angle1), std::polar(1.0, angle1 + angle2)});
}

ComplexMatrix compound_gate(const GateParams& g) {
  const auto u = iswap_unitary(g);
  const auto y1 = single_qubit_rotation(kAxisY, kPi, 0);
  const auto y2 = single_qubit_rotation(kAxisY, kPi, 1);
  return y1 * u * y2 * u;
}

ComplexMatrix cnot_matrix() { return ComplexMatrix{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}}; }

ComplexMatrix swap_matrix() { return ComplexMatrix{{1, 0, 0, 0}, {0, 0, 1, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}}; }

ComplexMatrix term_unitary(const GateTerm& t) {
  switch (t.kind) {
    case GateTerm::Kind::Rotation: return single_qubit_rotation(t.axis, t.angle, t.qubit);
    case GateTerm::Kind::VirtualZ: return t.qubit == 0 ? virtual_z(t.angle, 0.0) : virtual_z(0.0, t.angle);
    case GateTerm::Kind::ISwap: return ideal_iswap();
  }
  return ComplexMatrix::identity(4);
}

ComplexMatrix sequence_unitary(const std::vector<GateTerm>& terms) {
  auto u = ComplexMatrix::identity(4);
  for (const auto& t : terms) u = term_unitary(t) * u;
  return u;
}

int iswap_count(const std::vector<GateTerm>& terms) {
  int n = 0;
  for (const auto& t : terms) n += t.kind == GateTerm::Kind::ISwap;
  return n;
}

// Found by exhaustive search over X/Y/Z quarter- and half-turn layers.
std::vector<GateTerm> cnot_from_iswaps() {
  using T = GateTerm;
  return {T::iswap(),           T::rot(kAxisY, kPi / 2, 0), T::iswap(),
          T::vz(kPi / 2, 0),    T::rot(kAxisX, kPi / 2, 1), T::vz(kPi, 1)};
}

std::vector<GateTerm> swap_from_iswaps() {
  using T = GateTerm;
  return {T::iswap(), T::rot(kAxisX, kPi / 2, 1), T::iswap(),
          T::rot(kAxisX, kPi / 2, 0), T::iswap(), T::rot(kAxisX, kPi / 2, 1)};
}

std::size_t CanonicalKeyHash::operator()(const CanonicalKey& k) const {
  std::size_t h = 1469598103934665603ull;
  for (auto x : k.v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
  return h;
}

CanonicalKey canonical_key(const ComplexMatrix& u) {
  const auto& e = u.entries();
  cplx phase = 1.0;
  for (const auto& z : e)
    if (std::abs(z) > 1e-6) {
      phase = std::conj(z) / std::abs(z);
      break;
    }
  CanonicalKey k;
  k.v.reserve(2 * e.size());
  for (const auto& z : e) {
    const cplx w = z * phase;
    k.v.push_back(std::llround(w.real() * 1e9));
    k.v.push_back(std::llround(w.imag() * 1e9));
  }
  return k;
}

std::vector<ComplexMatrix> enumerate_c1() {
  const double r = 1.0 / std::sqrt(2.0);
  const ComplexMatrix h{{r, r}, {r, -r}};
  const ComplexMatrix s{{1.0, 0.0}, {0.0, kI}};
  std::vector<ComplexMatrix> out{ComplexMatrix::identity(2)};
  std::unordered_map<CanonicalKey, int, CanonicalKeyHash> seen{{canonical_key(out[0]), 0}};
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const auto cur = out[queue.front()];
    queue.pop_front();
    for (const auto* gen : {&h, &s}) {
      auto next = *gen * cur;
      auto key = canonical_key(next);
      if (seen.count(key)) continue;
      seen.emplace(std::move(key), static_cast<int>(out.size()));
      queue.push_back(out.size());
      out.push_back(std::move(next));
    }
  }
  return out;
}

std::vector<ComplexMatrix> s1_set() {
  const double a = 1.0 / std::sqrt(3.0);
  const auto s = rotation({a, a, a}, 2.0 * kPi / 3.0);
  return {ComplexMatrix::identity(2), s, s * s};
}

const char* clifford_class_name(CliffordClass c) {
  switch (c) {
    case CliffordClass::SQ: return "SQ";
    case CliffordClass::CnotLike: return "CNOT-like";
    case CliffordClass::SwapLike: return "SWAP-like";
    case CliffordClass::IswapLike: return "iSWAP-like";
  }
  return "?";
}

namespace {

// Shortest pulse list from {X, Y, +-X/2, +-Y/2} followed by a virtual Z that
// reproduces u up to phase.
std::vector<GateTerm> compile_single(const ComplexMatrix& u) {
  struct P {
    Axis axis;
    double angle;
  };
  const std::vector<P> pulses{{kAxisX, kPi / 2}, {kAxisX, -kPi / 2}, {kAxisY, kPi / 2},
                              {kAxisY, -kPi / 2}, {kAxisX, kPi},      {kAxisY, kPi}};
  const auto target = canonical_key(u);
  auto try_list = [&](const std::vector<P>& list) -> std::optional<std::vector<GateTerm>> {
    for (int z = 0; z < 4; ++z) {
      const double zang = z == 3 ? -kPi / 2 : z * kPi / 2;
      auto m = ComplexMatrix::identity(2);
      for (const auto& p : list) m = rotation(p.axis, p.angle) * m;
      m = rotation(kAxisZ, zang) * m;
      if (canonical_key(m) == target) {
        std::vector<GateTerm> out;
        for (const auto& p : list) out.push_back(GateTerm::rot(p.axis, p.angle, 0));
        if (z != 0) out.push_back(GateTerm::vz(zang, 0));
        return out;
      }
    }
    return std::nullopt;
  };
  if (auto t = try_list({})) return *t;
  for (const auto& a : pulses)
    if (auto t = try_list({a})) return *t;
  for (const auto& a : pulses)
    for (const auto& b : pulses)
      if (auto t = try_list({a, b})) return *t;
  throw Error(Errc::NotInGroup, "single-qubit Clifford not reachable with two pulses");
}

std::vector<GateTerm> on_qubit(std::vector<GateTerm> terms, int q) {
  for (auto& t : terms) t.qubit = q;
  return terms;
}

}  // namespace

CliffordGroup::CliffordGroup() : c1_(enumerate_c1()) {
  const auto s1 = s1_set();
  for (int i = 0; i < 3; ++i) {
    const auto key = canonical_key(s1[i]);
    s1_in_c1_[i] = -1;
    for (std::size_t j = 0; j < c1_.size(); ++j)
      if (canonical_key(c1_[j]) == key) s1_in_c1_[i] = static_cast<int>(j);
    if (s1_in_c1_[i] < 0) throw Error(Errc::NotInGroup, "S1 element outside C1");
  }

  const int n1 = static_cast<int>(c1_.size());
  std::vector<ComplexMatrix> layers(n1 * n1);
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n1; ++b) layers[a * n1 + b] = tensor_product(c1_[a], c1_[b]);
  std::array<ComplexMatrix, 9> s1_layers;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) s1_layers[a * 3 + b] = tensor_product(s1[a], s1[b]);

  auto add = [&](CliffordClass cls, int a, int b, int sa, int sb, ComplexMatrix u) {
    auto key = canonical_key(u);
    if (index_.count(key))
      throw Error(Errc::DuplicateDetected, std::string("duplicate Clifford in class ") + clifford_class_name(cls));
    index_.emplace(std::move(key), elements_.size());
    elements_.push_back({cls, a, b, sa, sb, std::move(u)});
  };

  elements_.reserve(11520);
  index_.reserve(11520);
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n1; ++b) add(CliffordClass::SQ, a, b, 0, 0, layers[a * n1 + b]);
  const auto cx = cnot_matrix();
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n1; ++b) {
      const auto g = cx * layers[a * n1 + b];
      for (int s = 0; s < 9; ++s) add(CliffordClass::CnotLike, a, b, s / 3, s % 3, s1_layers[s] * g);
    }
  const auto sw = swap_matrix();
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n1; ++b) add(CliffordClass::SwapLike, a, b, 0, 0, sw * layers[a * n1 + b]);
  const auto is = ideal_iswap();
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n1; ++b) {
      const auto g = is * layers[a * n1 + b];
      for (int s = 0; s < 9; ++s) add(CliffordClass::IswapLike, a, b, s / 3, s % 3, s1_layers[s] * g);
    }

  for (int q = 0; q < 2; ++q) {
    c1_terms_[q].reserve(c1_.size());
    for (const auto& u : c1_) c1_terms_[q].push_back(on_qubit(compile_single(u), q));
  }
}

std::size_t CliffordGroup::count(CliffordClass c) const {
  std::size_t n = 0;
  for (const auto& e : elements_) n += e.class_tag == c;
  return n;
}

std::size_t CliffordGroup::index_of(const ComplexMatrix& u) const {
  auto it = index_.find(canonical_key(u));
  if (it == index_.end()) throw Error(Errc::NotInGroup, "unitary is not a two-qubit Clifford");
  return it->second;
}

std::size_t CliffordGroup::invert(const std::vector<std::size_t>& sequence) const {
  if (sequence.empty()) throw Error(Errc::InvalidSequence, "cannot invert an empty sequence");
  auto u = ComplexMatrix::identity(4);
  for (auto i : sequence) u = elements_.at(i).unitary * u;
  return index_of(adjoint(u));
}

std::size_t CliffordGroup::compose(std::size_t a, std::size_t b) const {
  return index_of(elements_.at(b).unitary * elements_.at(a).unitary);
}

const std::vector<GateTerm>& CliffordGroup::compile_c1(int index, int qubit) const {
  return c1_terms_.at(qubit).at(index);
}

std::vector<GateTerm> CliffordGroup::compile(std::size_t i) const {
  const auto& e = elements_.at(i);
  std::vector<GateTerm> out;
  auto append = [&](const std::vector<GateTerm>& t) { out.insert(out.end(), t.begin(), t.end()); };
  append(compile_c1(e.c1a, 0));
  append(compile_c1(e.c1b, 1));
  switch (e.class_tag) {
    case CliffordClass::SQ: return out;
    case CliffordClass::CnotLike: append(cnot_from_iswaps()); break;
    case CliffordClass::SwapLike: append(swap_from_iswaps()); return out;
    case CliffordClass::IswapLike: out.push_back(GateTerm::iswap()); break;
  }
  append(compile_c1(s1_in_c1_[e.s1a], 0));
  append(compile_c1(s1_in_c1_[e.s1b], 1));
  return out;
}

}  // namespace dtc
