// Wall-clock comparison of the OpenMP kernels against their serial references.
// Each pair must produce identical output.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include "dtc/benchmarking.hpp"
#include "dtc/model.hpp"
#include "dtc/numerics.hpp"
#include "dtc/tomography.hpp"

using namespace dtc;

namespace {

double seconds(const std::function<void()>& f, int reps) {
  f();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

int failures = 0;

void report(const char* name, double par, double ser, bool same) {
  failures += !same;
  std::printf("%-24s parallel %9.4f s  serial %9.4f s  speedup %5.2fx  %s\n", name, par, ser, ser / par,
              same ? "identical" : "MISMATCH");
}

ComplexMatrix random_hermitian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  ComplexMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = {d(rng), d(rng)};
  return a + adjoint(a);
}

}  // namespace

int main() {
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());

  {
    const auto a = random_hermitian(256, 1), b = random_hermitian(256, 2);
    ComplexMatrix x, y;
    const double p = seconds([&] { x = multiply(a, b); }, 5);
    const double s = seconds([&] { y = serial::multiply(a, b); }, 5);
    report("matrix multiply 256", p, s, max_abs_diff(x, y) == 0.0);
  }
  {
    const auto h = random_hermitian(64, 3);
    Spectrum x, y;
    const double p = seconds([&] { x = hermitian_eigendecomposition(h); }, 3);
    const double s = seconds([&] { y = serial::hermitian_eigendecomposition(h); }, 3);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.eigenvalues.size(); ++i)
      worst = std::max(worst, std::abs(x.eigenvalues[i] - y.eigenvalues[i]));
    // Different rotation orders: equal to rounding.
    report("Jacobi eigensolver 64", p, s, worst < 1e-9);
  }
  {
    const auto dp = default_device_params();
    std::vector<double> phis;
    for (int i = 0; i < 16; ++i) phis.push_back(0.2 + 0.01 * i);
    std::vector<SweepRow> x, y;
    const double p = seconds([&] { x = flux_sweep(dp, phis); }, 1);
    const double s = seconds([&] { y = serial::flux_sweep(dp, phis); }, 1);
    bool same = x.size() == y.size();
    for (std::size_t i = 0; same && i < x.size(); ++i) same = x[i].g_zz_spec == y[i].g_zz_spec;
    report("flux sweep 16 points", p, s, same);
  }
  {
    TrueGateParams t;
    t.residual_gzz = -kTwoPi * 220e3;
    const VirtualDevice dev(t, NoiseModel::paper_coherence());
    const auto data = run_tomography(dev, {ParametricPulse{}}, 1024, 7);
    const auto th = chi_from_unitary(ideal_iswap());
    BootstrapResult x, y;
    const double p = seconds([&] { x = bootstrap_confidence(data, th, 20, 9); }, 1);
    const double s = seconds([&] { y = serial::bootstrap_confidence(data, th, 20, 9); }, 1);
    report("tomography bootstrap 20", p, s, x.fidelities == y.fidelities && x.phi_zzs == y.phi_zzs);

    const CliffordGroup group;
    RbOptions o;
    o.seeds_per_length = 10;
    o.seed = 5;
    {
      RbCurve a, b;
      const double pp = seconds([&] { a = run_standard_rb(dev, group, o); }, 1);
      const double ss = seconds([&] { b = serial::run_standard_rb(dev, group, o); }, 1);
      report("standard RB", pp, ss, a.samples == b.samples);
    }
    {
      InterleavedCurves a, b;
      const double pp = seconds([&] { a = run_interleaved_rb(dev, group, o); }, 1);
      const double ss = seconds([&] { b = serial::run_interleaved_rb(dev, group, o); }, 1);
      report("interleaved RB", pp, ss, a.interleaved.samples == b.interleaved.samples);
    }
    {
      SimRbCurves a, b;
      const double pp = seconds([&] { a = run_simultaneous_rb(dev, group, o); }, 1);
      const double ss = seconds([&] { b = serial::run_simultaneous_rb(dev, group, o); }, 1);
      report("simultaneous RB", pp, ss, a.z1z2.samples == b.z1z2.samples);
    }
  }
  return failures;
}
