#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dtc/numerics.hpp"

namespace dtc {

// Five-parameter iSWAP. Basis order |00>,|01>,|10>,|11>, Q1 is the left bit.
struct GateParams {
  double theta_p = kPi / 2;
  double phi_p = 0.0;
  double theta_1 = 0.0;
  double theta_2 = 0.0;
  double phi_zz = 0.0;

  double theta_s() const { return theta_1 + theta_2; }
  double theta_d() const { return theta_1 - theta_2; }
  // theta_p folded into [0, pi]; the sign and pi shifts move into phi_p.
  GateParams canonical() const;
  static GateParams ideal() { return {}; }
};

ComplexMatrix iswap_unitary(const GateParams& g);
ComplexMatrix ideal_iswap();

using Axis = std::array<double, 3>;
inline constexpr Axis kAxisX{1.0, 0.0, 0.0};
inline constexpr Axis kAxisY{0.0, 1.0, 0.0};
inline constexpr Axis kAxisZ{0.0, 0.0, 1.0};

// exp(-i angle/2 n.sigma), 2x2.
ComplexMatrix rotation(const Axis& axis, double angle);
// Same rotation embedded on qubit `target` (0 = Q1, 1 = Q2).
ComplexMatrix single_qubit_rotation(const Axis& axis, double angle, int target);
// diag(1, e^{i a2}, e^{i a1}, e^{i(a1+a2)}).
ComplexMatrix virtual_z(double angle1, double angle2);

// Y_Q1 * iSWAP * Y_Q2 * iSWAP as an operator product (rightmost acts first).
ComplexMatrix compound_gate(const GateParams& g);

ComplexMatrix cnot_matrix();  // control Q1
ComplexMatrix swap_matrix();

struct GateTerm {
  enum class Kind { Rotation, VirtualZ, ISwap };
  Kind kind = Kind::Rotation;
  Axis axis{};
  double angle = 0.0;
  int qubit = 0;

  static GateTerm rot(const Axis& axis, double angle, int qubit) { return {Kind::Rotation, axis, angle, qubit}; }
  static GateTerm vz(double angle, int qubit) { return {Kind::VirtualZ, {}, angle, qubit}; }
  static GateTerm iswap() { return {Kind::ISwap, {}, 0.0, 0}; }
};

ComplexMatrix term_unitary(const GateTerm& t);
// Product of terms in time order (first term acts first).
ComplexMatrix sequence_unitary(const std::vector<GateTerm>& terms);
int iswap_count(const std::vector<GateTerm>& terms);

std::vector<GateTerm> cnot_from_iswaps();
std::vector<GateTerm> swap_from_iswaps();

// Global-phase-insensitive hash key: phase of the first nonzero entry
// (row-major) removed, entries rounded to a 1e-9 grid.
struct CanonicalKey {
  std::vector<std::int64_t> v;
  bool operator==(const CanonicalKey& o) const { return v == o.v; }
};
struct CanonicalKeyHash {
  std::size_t operator()(const CanonicalKey& k) const;
};
CanonicalKey canonical_key(const ComplexMatrix& u);

// 24 single-qubit Cliffords, breadth-first closure of {H, S}; element 0 is I.
std::vector<ComplexMatrix> enumerate_c1();
// {I, S, S^2} with S = exp(-i pi (X+Y+Z)/(3 sqrt 3)).
std::vector<ComplexMatrix> s1_set();

enum class CliffordClass { SQ, CnotLike, SwapLike, IswapLike };
const char* clifford_class_name(CliffordClass c);

// Unitary = (S1[s1a] x S1[s1b]) * G * (C1[c1a] x C1[c1b]); SQ and SWAP-like
// elements have s1a = s1b = 0.
struct CliffordElement {
  CliffordClass class_tag = CliffordClass::SQ;
  int c1a = 0, c1b = 0, s1a = 0, s1b = 0;
  ComplexMatrix unitary;
};

// Immutable two-qubit Clifford table with canonical-form lookup.
class CliffordGroup {
 public:
  CliffordGroup();

  std::size_t size() const { return elements_.size(); }
  const CliffordElement& operator[](std::size_t i) const { return elements_[i]; }
  const std::vector<CliffordElement>& elements() const { return elements_; }
  std::size_t count(CliffordClass c) const;
  const std::vector<ComplexMatrix>& c1() const { return c1_; }

  // Index of the element equal to u up to global phase; NotInGroup otherwise.
  std::size_t index_of(const ComplexMatrix& u) const;
  // Element equal to (product of the sequence, first acts first)^dagger.
  std::size_t invert(const std::vector<std::size_t>& sequence) const;
  // Index of b * a (a first).
  std::size_t compose(std::size_t a, std::size_t b) const;

  // Physical terms implementing element i: single-qubit dressings compiled
  // to at most two X/Y pulses plus a virtual Z each, entangler via iSWAPs.
  std::vector<GateTerm> compile(std::size_t i) const;
  // Terms for a single-qubit Clifford on one qubit.
  const std::vector<GateTerm>& compile_c1(int index, int qubit) const;
  int s1_c1_index(int s1) const { return s1_in_c1_[s1]; }

 private:
  std::vector<ComplexMatrix> c1_;
  std::vector<CliffordElement> elements_;
  std::unordered_map<CanonicalKey, std::size_t, CanonicalKeyHash> index_;
  std::array<std::vector<std::vector<GateTerm>>, 2> c1_terms_;
  std::array<int, 3> s1_in_c1_{};
};

}  // namespace dtc
