#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace dtc {

using cplx = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kI{0.0, 1.0};

// Dense complex matrix, row-major.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(const std::vector<cplx>& d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }
  const std::vector<cplx>& entries() const { return data_; }

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(cplx s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx s, ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

// Row-parallel (OpenMP) product for large operands; small ones stay serial.
ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix adjoint(const ComplexMatrix& a);
ComplexMatrix transpose(const ComplexMatrix& a);
cplx trace(const ComplexMatrix& a);
double frobenius_norm(const ComplexMatrix& a);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
bool is_hermitian(const ComplexMatrix& a, double tol);

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b);

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // columns
};

// Cyclic Jacobi with round-robin pair ordering; each round applies n/2
// disjoint rotations in parallel.
Spectrum hermitian_eigendecomposition(const ComplexMatrix& h);

ComplexMatrix partial_trace(const ComplexMatrix& rho, const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep);

ComplexMatrix apply_channel(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& kraus);
// Kraus sum without the completeness check; for hot loops with trusted sets.
ComplexMatrix apply_kraus_unchecked(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& kraus);
ComplexMatrix conjugate(const ComplexMatrix& u, const ComplexMatrix& rho);  // u rho u^dagger

// exp(-i h t) for Hermitian h.
ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t);

// min over phi of ||u - e^{i phi} v||_F.
double global_phase_distance(const ComplexMatrix& u, const ComplexMatrix& v);

double min_eigenvalue(const ComplexMatrix& h);

namespace pauli {
ComplexMatrix I();
ComplexMatrix X();
ComplexMatrix Y();
ComplexMatrix Z();
// index 0..3 -> I, X, Y, Z
ComplexMatrix single(int index);
// two-qubit Pauli P_{4a+b} = sigma_a (x) sigma_b
ComplexMatrix two(int index);
}  // namespace pauli

namespace channels {
ComplexMatrix embed(const ComplexMatrix& op1q, int target);  // Q1 is the left factor
std::vector<ComplexMatrix> depolarizing(double p, int nqubits);
std::vector<ComplexMatrix> amplitude_damping(double gamma);
std::vector<ComplexMatrix> phase_damping(double lambda);
}  // namespace channels

namespace serial {
ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b);
// Classic row-cyclic Jacobi; reference for the parallel solver.
Spectrum hermitian_eigendecomposition(const ComplexMatrix& h);
}  // namespace serial

}  // namespace dtc
