#include "dtc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dtc/error.hpp"

namespace dtc {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw Error(Errc::DimensionMismatch, "entry count does not match rows*cols");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(Errc::DimensionMismatch, "ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<cplx>& d) {
  ComplexMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw Error(Errc::DimensionMismatch, "add: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw Error(Errc::DimensionMismatch, "sub: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
  for (auto& x : data_) x *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) { return multiply(a, b); }

namespace {

void check_product_shapes(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw Error(Errc::DimensionMismatch, "multiply: inner dimensions differ");
}

// c[i,:] = sum_k a[i,k] b[k,:], i-k-j order so the inner loop streams rows.
inline void multiply_row(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& c, std::size_t i) {
  const std::size_t n = b.cols();
  cplx* crow = c.data() + i * n;
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const cplx aik = a(i, k);
    if (aik == cplx{}) continue;
    const cplx* brow = b.data() + k * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
  }
}

constexpr std::size_t kParallelWork = 1u << 15;

}  // namespace

ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
  check_product_shapes(a, b);
  ComplexMatrix c(a.rows(), b.cols());
  const long rows = static_cast<long>(a.rows());
  const bool big = a.rows() * a.cols() * b.cols() >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (long i = 0; i < rows; ++i) multiply_row(a, b, c, static_cast<std::size_t>(i));
  return c;
}

namespace serial {
ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
  check_product_shapes(a, b);
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) multiply_row(a, b, c, i);
  return c;
}
}  // namespace serial

ComplexMatrix adjoint(const ComplexMatrix& a) {
  ComplexMatrix r(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = std::conj(a(i, j));
  return r;
}

ComplexMatrix transpose(const ComplexMatrix& a) {
  ComplexMatrix r(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
  return r;
}

cplx trace(const ComplexMatrix& a) {
  cplx t{};
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

double frobenius_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (const auto& x : a.entries()) s += std::norm(x);
  return std::sqrt(s);
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(Errc::DimensionMismatch, "shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i) m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  if (!a.square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      if (std::abs(a(i, j) - std::conj(a(j, i))) > tol) return false;
  return true;
}

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return r;
}

// ---------------------------------------------------------------------------
// Jacobi eigensolver

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kConvergence = 1e-12;

struct Rotation {
  std::size_t p, q;
  double c, s;
  cplx e;  // phase of a_pq
  double app, aqq;  // post-rotation diagonal
};

double max_abs_entry(const ComplexMatrix& h) {
  double m = 0.0;
  for (const auto& x : h.entries()) m = std::max(m, std::abs(x));
  return m;
}

void check_input(const ComplexMatrix& h) {
  if (!h.square()) throw Error(Errc::DimensionMismatch, "eigendecomposition needs a square matrix");
  if (h.rows() > 1024) throw Error(Errc::DimensionTooLarge, "eigendecomposition limited to dimension 1024");
  const double scale = std::max(1.0, max_abs_entry(h));
  if (!is_hermitian(h, 1e-10 * scale)) throw Error(Errc::NotHermitian, "matrix is not Hermitian");
}

double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// Returns false if the pair needs no rotation.
bool make_rotation(const ComplexMatrix& a, std::size_t p, std::size_t q, double skip, Rotation& r) {
  const cplx apq = a(p, q);
  const double mag = std::abs(apq);
  if (mag <= skip) return false;
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double tau = (aqq - app) / (2.0 * mag);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  r.p = p;
  r.q = q;
  r.c = 1.0 / std::sqrt(1.0 + t * t);
  r.s = t * r.c;
  r.e = apq / mag;
  r.app = app - t * mag;
  r.aqq = aqq + t * mag;
  return true;
}

// Right multiplication by J on one row: J_pp = c, J_pq = s, J_qp = -s conj(e), J_qq = c conj(e).
inline void rotate_columns(cplx* row, const Rotation& r) {
  const cplx x = row[r.p];
  const cplx y = row[r.q];
  const cplx ce = std::conj(r.e);
  row[r.p] = r.c * x - r.s * ce * y;
  row[r.q] = r.s * x + r.c * ce * y;
}

// Left multiplication by J^dagger on rows p and q.
inline void rotate_rows(ComplexMatrix& a, const Rotation& r) {
  const std::size_t n = a.cols();
  cplx* rp = a.data() + r.p * n;
  cplx* rq = a.data() + r.q * n;
  for (std::size_t k = 0; k < n; ++k) {
    const cplx x = rp[k];
    const cplx y = rq[k];
    rp[k] = r.c * x - r.s * r.e * y;
    rq[k] = r.s * x + r.c * r.e * y;
  }
}

inline void pin_block(ComplexMatrix& a, const Rotation& r) {
  a(r.p, r.p) = r.app;
  a(r.q, r.q) = r.aqq;
  a(r.p, r.q) = 0.0;
  a(r.q, r.p) = 0.0;
}

Spectrum finish(const ComplexMatrix& a, const ComplexMatrix& v) {
  const std::size_t n = a.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });
  Spectrum out;
  out.eigenvalues.resize(n);
  out.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace

Spectrum hermitian_eigendecomposition(const ComplexMatrix& h) {
  check_input(h);
  const std::size_t n = h.rows();
  ComplexMatrix a = h;
  for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double norm = frobenius_norm(a);
  if (n <= 1 || norm == 0.0) return finish(a, v);
  const double skip = 1e-18 * norm;

  // Round-robin tournament: slot 0 fixed, the rest rotate.
  const std::size_t m = n + (n % 2);
  std::vector<std::size_t> slots(m);
  std::iota(slots.begin(), slots.end(), 0);
  std::vector<Rotation> rots;
  rots.reserve(m / 2);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= kConvergence * norm) return finish(a, v);
    for (std::size_t round = 0; round + 1 < m; ++round) {
      rots.clear();
      for (std::size_t k = 0; k < m / 2; ++k) {
        std::size_t p = slots[k], q = slots[m - 1 - k];
        if (p >= n || q >= n) continue;
        if (p > q) std::swap(p, q);
        Rotation r;
        if (make_rotation(a, p, q, skip, r)) rots.push_back(r);
      }
      const long nr = static_cast<long>(rots.size());
      if (nr > 0) {
        const long rows = static_cast<long>(n);
        const bool big = n >= 64;
#pragma omp parallel if (big)
        {
#pragma omp for schedule(static)
          for (long i = 0; i < rows; ++i) {
            cplx* arow = a.data() + static_cast<std::size_t>(i) * n;
            cplx* vrow = v.data() + static_cast<std::size_t>(i) * n;
            for (const auto& r : rots) {
              rotate_columns(arow, r);
              rotate_columns(vrow, r);
            }
          }
#pragma omp for schedule(static)
          for (long k = 0; k < nr; ++k) rotate_rows(a, rots[static_cast<std::size_t>(k)]);
        }
        for (const auto& r : rots) pin_block(a, r);
      }
      std::rotate(slots.begin() + 1, slots.end() - 1, slots.end());
    }
  }
  if (off_diagonal_norm(a) <= kConvergence * norm) return finish(a, v);
  throw Error(Errc::NoConvergence, "Jacobi iteration exceeded 100 sweeps");
}

namespace serial {
Spectrum hermitian_eigendecomposition(const ComplexMatrix& h) {
  check_input(h);
  const std::size_t n = h.rows();
  ComplexMatrix a = h;
  for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double norm = frobenius_norm(a);
  if (n <= 1 || norm == 0.0) return finish(a, v);
  const double skip = 1e-18 * norm;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= kConvergence * norm) return finish(a, v);
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        Rotation r;
        if (!make_rotation(a, p, q, skip, r)) continue;
        for (std::size_t i = 0; i < n; ++i) {
          rotate_columns(a.data() + i * n, r);
          rotate_columns(v.data() + i * n, r);
        }
        rotate_rows(a, r);
        pin_block(a, r);
      }
  }
  if (off_diagonal_norm(a) <= kConvergence * norm) return finish(a, v);
  throw Error(Errc::NoConvergence, "Jacobi iteration exceeded 100 sweeps");
}
}  // namespace serial

double min_eigenvalue(const ComplexMatrix& h) { return hermitian_eigendecomposition(h).eigenvalues.front(); }

ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t) {
  const Spectrum s = hermitian_eigendecomposition(h);
  const std::size_t n = h.rows();
  ComplexMatrix scaled = s.eigenvectors;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx ph = std::exp(-kI * s.eigenvalues[j] * t);
    for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= ph;
  }
  return multiply(scaled, adjoint(s.eigenvectors));
}

// ---------------------------------------------------------------------------

ComplexMatrix partial_trace(const ComplexMatrix& rho, const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep) {
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  if (!rho.square() || total != rho.rows())
    throw Error(Errc::DimensionMismatch, "subsystem dimensions do not match the density matrix");
  std::vector<bool> kept(dims.size(), false);
  for (auto k : keep) {
    if (k >= dims.size()) throw Error(Errc::DimensionMismatch, "kept subsystem index out of range");
    kept[k] = true;
  }
  std::size_t out_dim = 1;
  for (std::size_t s = 0; s < dims.size(); ++s)
    if (kept[s]) out_dim *= dims[s];
  ComplexMatrix out(out_dim, out_dim);

  // Decompose a flat index into the kept part (as a flat index) and the traced part.
  auto split = [&](std::size_t idx, std::size_t& kidx, std::size_t& tidx) {
    kidx = 0;
    tidx = 0;
    std::size_t kmul = 1, tmul = 1;
    for (std::size_t s = dims.size(); s-- > 0;) {
      const std::size_t digit = idx % dims[s];
      idx /= dims[s];
      if (kept[s]) {
        kidx += digit * kmul;
        kmul *= dims[s];
      } else {
        tidx += digit * tmul;
        tmul *= dims[s];
      }
    }
  };
  std::vector<std::size_t> kpart(total), tpart(total);
  for (std::size_t i = 0; i < total; ++i) split(i, kpart[i], tpart[i]);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = 0; j < total; ++j)
      if (tpart[i] == tpart[j]) out(kpart[i], kpart[j]) += rho(i, j);
  return out;
}

ComplexMatrix conjugate(const ComplexMatrix& u, const ComplexMatrix& rho) {
  return multiply(multiply(u, rho), adjoint(u));
}

ComplexMatrix apply_kraus_unchecked(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& kraus) {
  ComplexMatrix out(rho.rows(), rho.cols());
  for (const auto& k : kraus) out += conjugate(k, rho);
  return out;
}

ComplexMatrix apply_channel(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& kraus) {
  if (kraus.empty()) throw Error(Errc::NotTracePreserving, "empty Kraus set");
  const std::size_t n = rho.rows();
  ComplexMatrix sum(n, n);
  for (const auto& k : kraus) {
    if (k.cols() != n || k.rows() != n) throw Error(Errc::DimensionMismatch, "Kraus operator shape");
    sum += multiply(adjoint(k), k);
  }
  if (max_abs_diff(sum, ComplexMatrix::identity(n)) > 1e-10)
    throw Error(Errc::NotTracePreserving, "sum of K^dagger K differs from identity");
  ComplexMatrix out = apply_kraus_unchecked(rho, kraus);
  // Symmetrize away rounding so downstream Hermiticity checks stay tight.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const cplx m = 0.5 * (out(i, j) + std::conj(out(j, i)));
      out(i, j) = m;
      out(j, i) = std::conj(m);
    }
  return out;
}

double global_phase_distance(const ComplexMatrix& u, const ComplexMatrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw Error(Errc::DimensionMismatch, "shape mismatch");
  cplx overlap{};
  for (std::size_t i = 0; i < u.entries().size(); ++i) overlap += std::conj(u.entries()[i]) * v.entries()[i];
  const cplx phase = std::abs(overlap) > 0.0 ? std::conj(overlap) / std::abs(overlap) : cplx{1.0, 0.0};
  double s = 0.0;
  for (std::size_t i = 0; i < u.entries().size(); ++i) s += std::norm(u.entries()[i] - phase * v.entries()[i]);
  return std::sqrt(s);
}

namespace pauli {
ComplexMatrix I() { return ComplexMatrix::identity(2); }
ComplexMatrix X() { return ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix Y() { return ComplexMatrix{{0.0, -kI}, {kI, 0.0}}; }
ComplexMatrix Z() { return ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}; }
ComplexMatrix single(int index) {
  switch (index) {
    case 0: return I();
    case 1: return X();
    case 2: return Y();
    default: return Z();
  }
}
ComplexMatrix two(int index) { return tensor_product(single(index / 4), single(index % 4)); }
}  // namespace pauli

namespace channels {

ComplexMatrix embed(const ComplexMatrix& op1q, int target) {
  return target == 0 ? tensor_product(op1q, pauli::I()) : tensor_product(pauli::I(), op1q);
}

std::vector<ComplexMatrix> depolarizing(double p, int nqubits) {
  const int d = 1 << nqubits;
  const int count = d * d;
  std::vector<ComplexMatrix> ks;
  const double w0 = std::sqrt(1.0 - p + p / count);
  const double w = std::sqrt(p / count);
  for (int i = 0; i < count; ++i) {
    ComplexMatrix k = nqubits == 1 ? pauli::single(i) : pauli::two(i);
    k *= (i == 0 ? w0 : w);
    ks.push_back(std::move(k));
  }
  return ks;
}

std::vector<ComplexMatrix> amplitude_damping(double gamma) {
  return {ComplexMatrix{{1.0, 0.0}, {0.0, std::sqrt(1.0 - gamma)}},
          ComplexMatrix{{0.0, std::sqrt(gamma)}, {0.0, 0.0}}};
}

std::vector<ComplexMatrix> phase_damping(double lambda) {
  return {ComplexMatrix{{1.0, 0.0}, {0.0, std::sqrt(1.0 - lambda)}},
          ComplexMatrix{{0.0, 0.0}, {0.0, std::sqrt(lambda)}}};
}

}  // namespace channels

}  // namespace dtc
