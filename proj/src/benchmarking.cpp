#include "dtc/benchmarking.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "dtc/error.hpp"
#include "dtc/fit.hpp"
#include "dtc/rng.hpp"

namespace dtc {

const char* rb_observable_name(RbObservable o) {
  switch (o) {
    case RbObservable::Z1: return "Z1";
    case RbObservable::Z2: return "Z2";
    case RbObservable::Z1Z2: return "Z1Z2";
    case RbObservable::P00: return "P00";
  }
  return "?";
}

void RbCurve::validate() const {
  if (lengths.size() != mean.size() || lengths.size() != stderr_mean.size())
    throw Error(Errc::DimensionMismatch, "curve arrays differ in length");
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (lengths[i] < 1) throw Error(Errc::OutOfRange, "sequence length must be at least 1");
    if (i > 0 && lengths[i] <= lengths[i - 1]) throw Error(Errc::OutOfRange, "lengths must increase strictly");
    const double lo = observable == RbObservable::P00 ? 0.0 : -1.0;
    if (!(mean[i] >= lo - 1e-12 && mean[i] <= 1.0 + 1e-12)) throw Error(Errc::OutOfRange, "curve mean out of range");
  }
}

namespace {

void check_options(const RbOptions& opt) {
  if (opt.lengths.empty()) throw Error(Errc::OutOfRange, "no sequence lengths");
  for (std::size_t i = 0; i < opt.lengths.size(); ++i) {
    if (opt.lengths[i] < 1) throw Error(Errc::OutOfRange, "sequence length must be at least 1");
    if (i > 0 && opt.lengths[i] <= opt.lengths[i - 1]) throw Error(Errc::OutOfRange, "lengths must increase strictly");
  }
  if (opt.seeds_per_length < 1) throw Error(Errc::OutOfRange, "seeds_per_length must be positive");
}

std::uint64_t sequence_seed(std::uint64_t seed, std::size_t l, int s) {
  return derive_seed(seed, (static_cast<std::uint64_t>(l) << 32) | static_cast<std::uint64_t>(s));
}

MeasurementRecord measure(const VirtualDevice& dev, const PulseSequence& seq, std::uint64_t shots,
                          std::uint64_t seed) {
  return shots == 0 ? dev.expectation(seq) : dev.run_sequence(seq, shots, seed);
}

RbCurve empty_curve(const RbOptions& opt, RbObservable obs) {
  RbCurve c;
  c.observable = obs;
  c.lengths = opt.lengths;
  c.seeds_per_length = opt.seeds_per_length;
  c.samples.assign(opt.lengths.size(), std::vector<double>(opt.seeds_per_length));
  c.seeds.assign(opt.lengths.size(), std::vector<std::uint64_t>(opt.seeds_per_length));
  return c;
}

void summarize(RbCurve& c) {
  const auto n = static_cast<double>(c.seeds_per_length);
  c.mean.clear();
  c.stderr_mean.clear();
  for (const auto& s : c.samples) {
    double m = 0.0;
    for (double v : s) m += v;
    m /= n;
    double var = 0.0;
    for (double v : s) var += (v - m) * (v - m);
    c.mean.push_back(m);
    c.stderr_mean.push_back(s.size() > 1 ? std::sqrt(var / (n - 1) / n) : 0.0);
  }
}

int c1_index(const std::vector<ComplexMatrix>& c1, const ComplexMatrix& u) {
  for (std::size_t i = 0; i < c1.size(); ++i)
    if (global_phase_distance(c1[i], u) < 1e-8) return static_cast<int>(i);
  throw Error(Errc::NotInGroup, "product is not a single-qubit Clifford");
}

// One (length, seed) point of each protocol.
struct StandardKernel {
  const VirtualDevice& dev;
  const CliffordGroup& group;
  const RbOptions& opt;
  void operator()(std::size_t l, int s, RbCurve& out) const {
    const auto seed = sequence_seed(opt.seed, l, s);
    const auto seq = rb_pulse_sequence(group, rb_clifford_sequence(group, opt.lengths[l], seed), opt.calibration);
    out.seeds[l][s] = seed;
    out.samples[l][s] = measure(dev, seq, opt.shots, derive_seed(seed, 1)).p00();
  }
};

struct InterleavedKernel {
  const VirtualDevice& dev;
  const CliffordGroup& group;
  const RbOptions& opt;
  std::size_t gate;
  void operator()(std::size_t l, int s, InterleavedCurves& out) const {
    const auto seed = sequence_seed(opt.seed, l, s);
    const auto a = rb_clifford_sequence(group, opt.lengths[l], seed);
    const auto b = rb_clifford_sequence(group, opt.lengths[l], seed, &gate);
    out.standard.seeds[l][s] = out.interleaved.seeds[l][s] = seed;
    out.standard.samples[l][s] =
        measure(dev, rb_pulse_sequence(group, a, opt.calibration), opt.shots, derive_seed(seed, 1)).p00();
    out.interleaved.samples[l][s] =
        measure(dev, rb_pulse_sequence(group, b, opt.calibration), opt.shots, derive_seed(seed, 2)).p00();
  }
};

struct SimKernel {
  const VirtualDevice& dev;
  const CliffordGroup& group;
  const RbOptions& opt;
  void operator()(std::size_t l, int s, SimRbCurves& out) const {
    const auto seed = sequence_seed(opt.seed, l, s);
    const auto r = measure(dev, sim_rb_pulse_sequence(group, sim_rb_sequence(group, opt.lengths[l], seed)), opt.shots,
                           derive_seed(seed, 1));
    out.z1.seeds[l][s] = out.z2.seeds[l][s] = out.z1z2.seeds[l][s] = seed;
    out.z1.samples[l][s] = r.z1;
    out.z2.samples[l][s] = r.z2;
    out.z1z2.samples[l][s] = r.z1z2;
  }
};

// Flattened (length, seed) grid, longest sequences scheduled first.
template <class Kernel, class Out>
void run_parallel(const Kernel& k, const RbOptions& opt, Out& out) {
  const auto nl = static_cast<long>(opt.lengths.size());
  const long total = nl * opt.seeds_per_length;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < total; ++i) {
    const auto l = static_cast<std::size_t>(nl - 1 - i / opt.seeds_per_length);
    k(l, static_cast<int>(i % opt.seeds_per_length), out);
  }
}

template <class Kernel, class Out>
void run_serial(const Kernel& k, const RbOptions& opt, Out& out) {
  for (std::size_t l = 0; l < opt.lengths.size(); ++l)
    for (int s = 0; s < opt.seeds_per_length; ++s) k(l, s, out);
}

RbCurve standard_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt, bool parallel) {
  check_options(opt);
  auto c = empty_curve(opt, RbObservable::P00);
  const StandardKernel k{dev, group, opt};
  parallel ? run_parallel(k, opt, c) : run_serial(k, opt, c);
  summarize(c);
  return c;
}

InterleavedCurves interleaved_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt,
                                 bool parallel) {
  check_options(opt);
  InterleavedCurves c{empty_curve(opt, RbObservable::P00), empty_curve(opt, RbObservable::P00)};
  const InterleavedKernel k{dev, group, opt, group.index_of(ideal_iswap())};
  parallel ? run_parallel(k, opt, c) : run_serial(k, opt, c);
  summarize(c.standard);
  summarize(c.interleaved);
  return c;
}

SimRbCurves simultaneous_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt,
                            bool parallel) {
  check_options(opt);
  SimRbCurves c{empty_curve(opt, RbObservable::Z1), empty_curve(opt, RbObservable::Z2),
                empty_curve(opt, RbObservable::Z1Z2)};
  const SimKernel k{dev, group, opt};
  parallel ? run_parallel(k, opt, c) : run_serial(k, opt, c);
  summarize(c.z1);
  summarize(c.z2);
  summarize(c.z1z2);
  return c;
}

}  // namespace

std::vector<std::size_t> rb_clifford_sequence(const CliffordGroup& group, int length, std::uint64_t seed,
                                              const std::size_t* interleaved) {
  if (length < 1) throw Error(Errc::OutOfRange, "sequence length must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, group.size() - 1);
  std::vector<std::size_t> seq;
  for (int i = 0; i + 1 < length; ++i) {
    if (interleaved) seq.push_back(*interleaved);
    seq.push_back(pick(rng));
  }
  seq.push_back(seq.empty() ? group.index_of(ComplexMatrix::identity(4)) : group.invert(seq));
  return seq;
}

PulseSequence rb_pulse_sequence(const CliffordGroup& group, const std::vector<std::size_t>& cliffords,
                                const GateCalibration& cal) {
  PulseSequence seq;
  seq.ops.emplace_back(Prep{});
  for (auto c : cliffords) {
    const auto ops = lower_terms(group.compile(c), cal);
    seq.ops.insert(seq.ops.end(), ops.begin(), ops.end());
    seq.ops.emplace_back(CliffordMark{});
  }
  seq.ops.emplace_back(Measure{});
  return seq;
}

std::array<std::vector<int>, 2> sim_rb_sequence(const CliffordGroup& group, int length, std::uint64_t seed) {
  if (length < 1) throw Error(Errc::OutOfRange, "sequence length must be at least 1");
  const auto& c1 = group.c1();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(c1.size()) - 1);
  std::array<std::vector<int>, 2> out;
  std::array<ComplexMatrix, 2> u{ComplexMatrix::identity(2), ComplexMatrix::identity(2)};
  for (int i = 0; i + 1 < length; ++i)
    for (int q = 0; q < 2; ++q) {
      out[q].push_back(pick(rng));
      u[q] = c1[out[q].back()] * u[q];
    }
  for (int q = 0; q < 2; ++q) out[q].push_back(c1_index(c1, adjoint(u[q])));
  return out;
}

PulseSequence sim_rb_pulse_sequence(const CliffordGroup& group, const std::array<std::vector<int>, 2>& c1) {
  if (c1[0].size() != c1[1].size()) throw Error(Errc::DimensionMismatch, "per-qubit sequences differ in length");
  PulseSequence seq;
  seq.ops.emplace_back(Prep{});
  for (std::size_t i = 0; i < c1[0].size(); ++i) {
    auto terms = group.compile_c1(c1[0][i], 0);
    const auto& t2 = group.compile_c1(c1[1][i], 1);
    terms.insert(terms.end(), t2.begin(), t2.end());
    const auto ops = lower_terms(terms, GateCalibration{});
    seq.ops.insert(seq.ops.end(), ops.begin(), ops.end());
    seq.ops.emplace_back(CliffordMark{});
  }
  seq.ops.emplace_back(Measure{});
  return seq;
}

RbCurve run_standard_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt) {
  return standard_rb(dev, group, opt, true);
}
InterleavedCurves run_interleaved_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt) {
  return interleaved_rb(dev, group, opt, true);
}
SimRbCurves run_simultaneous_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt) {
  return simultaneous_rb(dev, group, opt, true);
}

namespace serial {
RbCurve run_standard_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt) {
  return standard_rb(dev, group, opt, false);
}
InterleavedCurves run_interleaved_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt) {
  return interleaved_rb(dev, group, opt, false);
}
SimRbCurves run_simultaneous_rb(const VirtualDevice& dev, const CliffordGroup& group, const RbOptions& opt) {
  return simultaneous_rb(dev, group, opt, false);
}
}  // namespace serial

double error_rate(double p, int d) {
  if (d < 2) throw Error(Errc::OutOfRange, "dimension must be at least 2");
  return (d - 1) * (1.0 - p) / d;
}

DecayFit fit_decay(const RbCurve& curve, int d) {
  curve.validate();
  const auto n = curve.lengths.size();
  if (n < 4) throw Error(Errc::InsufficientData, "decay fit needs at least four lengths");
  if (d < 2) throw Error(Errc::OutOfRange, "dimension must be at least 2");

  Eigen::VectorXd m(n), y(n), w(n);
  bool weighted = false;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = curve.lengths[i];
    y[i] = curve.mean[i];
    weighted = weighted || curve.stderr_mean[i] > 1e-12;
  }
  for (std::size_t i = 0; i < n; ++i) w[i] = weighted ? 1.0 / std::max(curve.stderr_mean[i], 1e-6) : 1.0;

  // Linearized start: log of the baseline-subtracted means.
  const double b0 = curve.observable == RbObservable::P00 ? 1.0 / d : 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, sw = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::log(std::max(y[i] - b0, 1e-6));
    sw += 1;
    sx += m[i];
    sy += v;
    sxx += m[i] * m[i];
    sxy += m[i] * v;
  }
  const double den = sw * sxx - sx * sx;
  const double slope = den != 0.0 ? (sw * sxy - sx * sy) / den : 0.0;
  const double icept = (sy - slope * sx) / sw;
  Eigen::VectorXd x0(3);
  x0 << std::exp(icept), std::clamp(std::exp(slope), 1e-3, 1.0), b0;

  auto resid = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = w[i] * (x[0] * std::pow(x[1], m[i]) + x[2] - y[i]);
    return r;
  };
  auto jac = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd j(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
      j(i, 0) = w[i] * std::pow(x[1], m[i]);
      j(i, 1) = w[i] * x[0] * m[i] * std::pow(x[1], m[i] - 1.0);
      j(i, 2) = w[i];
    }
    return j;
  };
  const auto res = fit::levenberg_marquardt(resid, x0, {}, jac);
  if (!res.x.allFinite() || !(res.x[1] > 0.0)) throw Error(Errc::FitDiverged, "decay fit left the domain p > 0");

  DecayFit f;
  f.d = d;
  f.A = res.x[0];
  f.p = res.x[1];
  f.B = res.x[2];
  const auto dof = static_cast<double>(n) - 3.0;
  f.reduced_chi2 = dof > 0 ? 2.0 * res.cost / dof : 0.0;
  // Scale by the residual only when no external errors are available.
  const Eigen::MatrixXd cov = res.covariance(!weighted);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) f.covariance[i][j] = cov(i, j);
  f.p_err = std::sqrt(std::max(0.0, cov(1, 1)));
  if (f.p > 1.0 + 3.0 * f.p_err + 1e-12) throw Error(Errc::NonDecaying, "fitted p exceeds 1 by more than 3 sigma");
  f.p = std::min(f.p, 1.0);
  f.r = error_rate(f.p, d);
  f.r_err = (d - 1.0) / d * f.p_err;
  return f;
}

double interleaved_fidelity(const DecayFit& fit_std, const DecayFit& fit_int) {
  constexpr double d = 4.0;
  return 1.0 - (d - 1.0) / d * (fit_std.p - fit_int.p) / fit_std.p;
}

double decoherence_limited_fidelity(const NoiseModel& noise, double tau) {
  if (!(tau > 0.0)) throw Error(Errc::OutOfRange, "gate duration must be positive");
  double sum = 0.0;
  for (int q = 0; q < 2; ++q) {
    if (!std::isinf(noise.t1[q])) sum += 0.5 / noise.t1[q];
    if (!std::isinf(noise.t2[q])) sum += 1.0 / noise.t2[q];
  }
  return 1.0 - 0.4 * tau * sum;
}

PulseSequence jazz_sequence(Q2State q2, double delay, double detuning_hz) {
  if (!(delay >= 0.0)) throw Error(Errc::OutOfRange, "delay must be nonnegative");
  PulseSequence seq;
  seq.ops.emplace_back(Prep{});
  if (q2 == Q2State::Excited) seq.ops.emplace_back(SQRotation{kAxisX, kPi, 1});
  seq.ops.emplace_back(SQRotation{kAxisX, kPi / 2, 0});
  seq.ops.emplace_back(Idle{delay / 2});
  seq.ops.emplace_back(SQRotation{kAxisX, kPi, 0});
  seq.ops.emplace_back(SQRotation{kAxisX, kPi, 1, true});
  seq.ops.emplace_back(Idle{delay / 2});
  seq.ops.emplace_back(VirtualZ{2 * kPi * detuning_hz * delay, 0.0});
  seq.ops.emplace_back(SQRotation{kAxisX, kPi / 2, 0});
  seq.ops.emplace_back(Measure{});
  return seq;
}

JazzResult fit_ramsey(const std::vector<double>& delays, const std::vector<double>& z) {
  const auto n = delays.size();
  if (n != z.size()) throw Error(Errc::DimensionMismatch, "delays and values differ in length");
  if (n < 8) throw Error(Errc::InsufficientData, "Ramsey fit needs at least eight delays");
  const double t0 = *std::min_element(delays.begin(), delays.end());
  const double span = *std::max_element(delays.begin(), delays.end()) - t0;
  if (!(span > 0.0)) throw Error(Errc::InsufficientData, "delays do not span an interval");

  // Periodogram start, frequencies in units of 1/span.
  double zbar = 0.0;
  for (double v : z) zbar += v;
  zbar /= static_cast<double>(n);
  const double fmax = 0.5 * static_cast<double>(n - 1);
  double best = -1.0, f0 = 0.0;
  for (int k = 1; k <= 4000; ++k) {
    const double f = fmax * k / 4000.0;
    double c = 0.0, s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = 2 * kPi * f * (delays[i] - t0) / span;
      c += (z[i] - zbar) * std::cos(ph);
      s += (z[i] - zbar) * std::sin(ph);
    }
    if (c * c + s * s > best) {
      best = c * c + s * s;
      f0 = f;
    }
  }
  double ca = 0.0, sa = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = 2 * kPi * f0 * (delays[i] - t0) / span;
    ca += (z[i] - zbar) * std::cos(ph);
    sa += (z[i] - zbar) * std::sin(ph);
  }
  const double amp0 = 2.0 * std::sqrt(ca * ca + sa * sa) / static_cast<double>(n);
  if (!(amp0 > 0.02)) throw Error(Errc::FitDiverged, "no Ramsey oscillation found");

  // x = (A, f, phase, B, decay), times scaled by span.
  auto resid = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (delays[i] - t0) / span;
      r[i] = x[0] * std::exp(-x[4] * u) * std::cos(2 * kPi * x[1] * u + x[2]) + x[3] - z[i];
    }
    return r;
  };
  Eigen::VectorXd x0(5);
  x0 << amp0, f0, std::atan2(-sa, ca), zbar, 0.0;
  const auto res = fit::levenberg_marquardt(resid, x0);
  if (!res.x.allFinite()) throw Error(Errc::FitDiverged, "Ramsey fit diverged");

  JazzResult out;
  out.delays = delays;
  out.z1 = z;
  out.amplitude = std::abs(res.x[0]);
  out.frequency_hz = std::abs(res.x[1]) / span;
  out.decay_rate = res.x[4] / span;
  out.frequency_err_hz = std::sqrt(std::max(0.0, res.covariance()(1, 1))) / span;
  if (out.amplitude < 0.02) throw Error(Errc::FitDiverged, "Ramsey amplitude collapsed");
  return out;
}

JazzResult run_jazz(const VirtualDevice& dev, Q2State q2, const JazzOptions& opt) {
  auto delays = opt.delays;
  if (delays.empty())
    for (int i = 0; i <= 80; ++i) delays.push_back(4e-6 * i / 80.0);
  std::vector<double> z(delays.size());
  const auto stream = q2 == Q2State::Ground ? 0u : 1u;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(delays.size()); ++i) {
    const auto seq = jazz_sequence(q2, delays[i], opt.detuning_hz);
    z[i] = measure(dev, seq, opt.shots, derive_seed(opt.seed, 2 * static_cast<std::uint64_t>(i) + stream)).z1;
  }
  auto out = fit_ramsey(delays, z);
  out.q2_state = q2;
  return out;
}

double jazz_extract_gzz(double freq_ground_hz, double freq_excited_hz) {
  return 2 * kPi * (freq_excited_hz - freq_ground_hz);
}

}  // namespace dtc
