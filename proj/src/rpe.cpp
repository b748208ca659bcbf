#include "dtc/rpe.hpp"

#include <algorithm>
#include <cmath>

#include "dtc/error.hpp"
#include "dtc/fit.hpp"
#include "dtc/model.hpp"
#include "dtc/rng.hpp"

namespace dtc {

namespace {

constexpr int kQ1 = 0, kQ2 = 1;

SQRotation x_pi(int q) { return {kAxisX, kPi, q, false}; }

void require_reps(int n) {
  if (n < 1) throw Error(Errc::OutOfRange, "repetition count must be at least 1");
}

}  // namespace

const char* rpe_target_name(RpeTarget t) {
  switch (t) {
    case RpeTarget::ThetaP: return "theta_p";
    case RpeTarget::ThetaS: return "theta_s";
    case RpeTarget::ThetaD: return "theta_d";
  }
  return "?";
}

double rpe_amplification(RpeTarget t) { return t == RpeTarget::ThetaP ? 2.0 : 1.0; }

int rpe_iswaps_per_rep(RpeTarget t) { return t == RpeTarget::ThetaD ? 2 : 1; }

// |01>, n pulses, optional sqrt(iSWAP); <Z1> = cos(2 n theta_p) or -sin(2 n theta_p).
PulseSequence build_theta_p_sequences(int n, TrigVariant v, const RpePulseSettings& s) {
  require_reps(n);
  PulseSequence seq;
  seq.ops.push_back(Prep{});
  seq.ops.push_back(x_pi(kQ2));
  for (int i = 0; i < n; ++i) seq.ops.push_back(ParametricPulse{s.amplitude, 0.0, 0.0, 0.0});
  if (v == TrigVariant::Sin) seq.ops.push_back(ParametricPulse{s.half_amplitude, 0.0, 0.0, 0.0});
  seq.ops.push_back(Measure{});
  return seq;
}

// (|00> + i|11>)/sqrt2, n pulses, then X_Q2 and sqrt(iSWAP) with phase pi/2
// (sin, <Z1> = sin) or 0 (cos, <Z1> = -cos).
PulseSequence build_theta_s_sequences(int n, TrigVariant v, const RpePulseSettings& s) {
  require_reps(n);
  PulseSequence seq;
  seq.ops.push_back(Prep{});
  seq.ops.push_back(x_pi(kQ2));
  seq.ops.push_back(ParametricPulse{s.half_amplitude, 0.0, 0.0, 0.0});
  seq.ops.push_back(x_pi(kQ2));
  for (int i = 0; i < n; ++i) seq.ops.push_back(ParametricPulse{s.amplitude, 0.0, 0.0, 0.0});
  seq.ops.push_back(x_pi(kQ2));
  seq.ops.push_back(ParametricPulse{s.half_amplitude, v == TrigVariant::Sin ? kPi / 2 : 0.0, 0.0, 0.0});
  seq.ops.push_back(Measure{});
  return seq;
}

// (|00> + i|10>)/sqrt2, n compound blocks, Q1 read out along X (sin) or Y (cos).
PulseSequence build_theta_d_sequences(int n, TrigVariant v, const RpePulseSettings& s) {
  require_reps(n);
  PulseSequence seq;
  seq.ops.push_back(Prep{});
  seq.ops.push_back(SQRotation{kAxisX, -kPi / 2, kQ1, false});
  auto y = [&](int q, bool ym) {
    const VirtualZ z = q == kQ1 ? VirtualZ{kPi, 0.0} : VirtualZ{0.0, kPi};
    if (ym) seq.ops.push_back(z);
    seq.ops.push_back(SQRotation{kAxisY, kPi, q, false});
    if (ym) seq.ops.push_back(z);
  };
  for (int r = 1; r <= n; ++r) {
    const bool ym = s.alternate_ym && r % 2 == 0;
    seq.ops.push_back(ParametricPulse{s.amplitude, 0.0, 0.0, 0.0});
    y(kQ2, ym);
    seq.ops.push_back(ParametricPulse{s.amplitude, 0.0, 0.0, 0.0});
    y(kQ1, ym);
  }
  Measure m;
  if (v == TrigVariant::Sin)
    m.basis.push_back(SQRotation{kAxisY, -kPi / 2, kQ1, false});
  else
    m.basis.push_back(SQRotation{kAxisX, kPi / 2, kQ1, false});
  seq.ops.push_back(m);
  return seq;
}

PulseSequence build_rpe_sequence(RpeTarget t, int n, TrigVariant v, const RpePulseSettings& s) {
  switch (t) {
    case RpeTarget::ThetaP: return build_theta_p_sequences(n, v, s);
    case RpeTarget::ThetaS: return build_theta_s_sequences(n, v, s);
    case RpeTarget::ThetaD: return build_theta_d_sequences(n, v, s);
  }
  throw Error(Errc::OutOfRange, "unknown RPE target");
}

double rpe_readout_sign(RpeTarget t, TrigVariant v) {
  if (t == RpeTarget::ThetaP && v == TrigVariant::Sin) return -1.0;
  if (t == RpeTarget::ThetaS && v == TrigVariant::Cos) return -1.0;
  return 1.0;
}

void RpeMeasurementPair::validate() const {
  if (n_reps == 0 || (n_reps & (n_reps - 1)) != 0)
    throw Error(Errc::OutOfRange, "n_reps must be a positive power of two");
  if (!(std::abs(sin_value) <= 1.0 + 1e-12 && std::abs(cos_value) <= 1.0 + 1e-12))
    throw Error(Errc::OutOfRange, "trig values must lie in [-1, 1]");
}

RpeMeasurementPair measure_rpe_pair(const VirtualDevice& dev, RpeTarget t, std::uint64_t n_reps,
                                    const RpePulseSettings& s, std::uint64_t shots, std::uint64_t seed) {
  RpeMeasurementPair p;
  p.n_reps = n_reps;
  p.shots = shots;
  const int n = static_cast<int>(n_reps);
  const auto rs = dev.run_sequence(build_rpe_sequence(t, n, TrigVariant::Sin, s), shots, derive_seed(seed, 0));
  const auto rc = dev.run_sequence(build_rpe_sequence(t, n, TrigVariant::Cos, s), shots, derive_seed(seed, 1));
  p.sin_value = rpe_readout_sign(t, TrigVariant::Sin) * rs.z1;
  p.cos_value = rpe_readout_sign(t, TrigVariant::Cos) * rc.z1;
  p.sin_err = rs.z1_err;
  p.cos_err = rc.z1_err;
  return p;
}

double rpe_update(double prev_theta, const RpeMeasurementPair& pair, int k, double amplification) {
  pair.validate();
  if (k < 0) throw Error(Errc::OutOfRange, "generation must be non-negative");
  if (!(amplification > 0.0)) throw Error(Errc::OutOfRange, "amplification must be positive");
  if (pair.sin_value == 0.0 && pair.cos_value == 0.0)
    throw Error(Errc::AmbiguousBranch, "zero-length (sin, cos) pair carries no phase");
  const double phi = std::atan2(pair.sin_value, pair.cos_value);
  const double scale = amplification * std::ldexp(1.0, k);
  const double x = (prev_theta * scale - phi) / (2.0 * kPi);
  const double m = std::round(x);
  const double gap = std::abs(1.0 - 2.0 * std::abs(x - m)) * 2.0 * kPi / scale;
  if (gap < 1e-9) throw Error(Errc::AmbiguousBranch, "estimate on the trust-region boundary");
  return (phi + 2.0 * kPi * m) / scale;
}

double RpeEstimate::uncertainty() const { return kPi / (amplification * std::ldexp(1.0, k_max)); }

RpeEstimate run_rpe(RpeTarget t, const RpePairSource& source, double prior, const RpeRunOptions& opt) {
  if (opt.k_max < 0) throw Error(Errc::OutOfRange, "k_max must be non-negative");
  RpeEstimate est;
  est.target = t;
  est.prior = prior;
  est.k_max = opt.k_max;
  est.amplification = rpe_amplification(t);
  double prev = prior;
  int violations = 0;
  for (int k = 0; k <= opt.k_max; ++k) {
    RpeGeneration g;
    g.k = k;
    g.n_reps = std::uint64_t{1} << k;
    for (int attempt = 0;; ++attempt) {
      const std::uint64_t shots = opt.shots << attempt;
      g.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(k) * 64 + static_cast<std::uint64_t>(attempt));
      g.pair = source(g.n_reps, shots, g.seed);
      g.pair.n_reps = g.n_reps;
      try {
        g.theta = rpe_update(prev, g.pair, k, est.amplification);
        g.retries = attempt;
        break;
      } catch (const Error& e) {
        if (e.code() != Errc::AmbiguousBranch || opt.shots == 0 || attempt >= opt.max_retries) throw;
      }
    }
    const double half_trust = kPi / (2.0 * est.amplification * std::ldexp(1.0, k));
    if (k > 0 && std::abs(g.theta - prev) > half_trust && ++violations >= 2)
      throw Error(Errc::ConvergenceStall, std::string(rpe_target_name(t)) + ": estimates left the trust region twice");
    prev = g.theta;
    est.generations.push_back(g);
  }
  est.theta = prev;
  return est;
}

ChevronMap synthetic_chevron(double g, double center, const std::vector<double>& detunings,
                             const std::vector<double>& times) {
  ChevronMap m{detunings, times, {}};
  for (double d : detunings) {
    std::vector<double> row;
    for (double t : times) row.push_back(chevron_population(g, d - center, t));
    m.population.push_back(std::move(row));
  }
  return m;
}

ChevronMap run_chevron(const VirtualDevice& dev, const std::vector<double>& detunings,
                       const std::vector<double>& times, std::uint64_t shots, std::uint64_t seed) {
  ChevronMap m{detunings, times, std::vector<std::vector<double>>(detunings.size(), std::vector<double>(times.size()))};
  const long nd = static_cast<long>(detunings.size()), nt = static_cast<long>(times.size());
#pragma omp parallel for schedule(dynamic)
  for (long idx = 0; idx < nd * nt; ++idx) {
    const long i = idx / nt, j = idx % nt;
    PulseSequence seq;
    seq.ops.push_back(Prep{});
    seq.ops.push_back(x_pi(kQ2));
    if (times[j] > 0.0) seq.ops.push_back(ParametricPulse{1.0, 0.0, times[j], detunings[i]});
    seq.ops.push_back(Measure{});
    const auto r = dev.run_sequence(seq, shots, derive_seed(seed, static_cast<std::uint64_t>(idx)));
    m.population[i][j] = 0.5 * (1.0 - r.z1);
  }
  return m;
}

ChevronFit rough_chevron_fit(const ChevronMap& map) {
  const std::size_t nd = map.detunings.size(), nt = map.times.size();
  if (nd < 1 || nt < 3 || map.population.size() != nd)
    throw Error(Errc::InsufficientData, "chevron map needs at least one detuning and three times");
  double lo = 1e300, hi = -1e300;
  for (const auto& row : map.population) {
    if (row.size() != nt) throw Error(Errc::DimensionMismatch, "ragged chevron map");
    for (double p : row) lo = std::min(lo, p), hi = std::max(hi, p);
  }
  if (!(hi - lo > 0.05)) throw Error(Errc::FitDiverged, "chevron map has no oscillation");

  // Center: centroid of the time-averaged population above half its peak.
  std::vector<double> mean(nd, 0.0);
  for (std::size_t i = 0; i < nd; ++i) {
    for (double p : map.population[i]) mean[i] += p;
    mean[i] /= static_cast<double>(nt);
  }
  const double mlo = *std::min_element(mean.begin(), mean.end());
  const double mhi = *std::max_element(mean.begin(), mean.end());
  double wsum = 0.0, csum = 0.0;
  for (std::size_t i = 0; i < nd; ++i) {
    const double w = mean[i] - 0.5 * (mlo + mhi);
    if (w > 0.0) wsum += w, csum += w * map.detunings[i];
  }
  const double c0 = wsum > 0.0 ? csum / wsum : map.detunings[nd / 2];
  std::size_t row = 0;
  for (std::size_t i = 1; i < nd; ++i)
    if (std::abs(map.detunings[i] - c0) < std::abs(map.detunings[row] - c0)) row = i;

  // Rate: grid search of A sin^2(g t) + B on the nearest-resonance row.
  const double tmax = *std::max_element(map.times.begin(), map.times.end());
  double dt = tmax;
  for (std::size_t j = 1; j < nt; ++j) dt = std::min(dt, std::abs(map.times[j] - map.times[j - 1]));
  const double gmin = 0.25 * kPi / tmax, gmax = 0.5 * kPi / dt;
  double best_g = gmin, best_r = 1e300;
  const auto& y = map.population[row];
  for (int s = 0; s <= 2000; ++s) {
    const double g = gmin * std::pow(gmax / gmin, s / 2000.0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t j = 0; j < nt; ++j) {
      const double x = std::pow(std::sin(g * map.times[j]), 2);
      sx += x, sy += y[j], sxx += x * x, sxy += x * y[j], syy += y[j] * y[j];
    }
    const double n = static_cast<double>(nt), det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-12) continue;
    const double a = (n * sxy - sx * sy) / det, b = (sy - a * sx) / n;
    const double r = syy - 2 * a * sxy - 2 * b * sy + a * a * sxx + 2 * a * b * sx + n * b * b;
    if (a > 0.0 && r < best_r) best_r = r, best_g = g;
  }

  // Scale rates to order one for conditioning.
  const double unit = best_g;
  auto residual = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(nd * nt));
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < nd; ++i)
      for (std::size_t j = 0; j < nt; ++j)
        r[k++] = x[2] * chevron_population(x[0] * unit, map.detunings[i] - x[1] * unit, map.times[j]) + x[3] -
                 map.population[i][j];
    return r;
  };
  Eigen::VectorXd x0(4);
  x0 << 1.0, c0 / unit, std::max(hi - lo, 0.1), lo;
  const auto res = fit::levenberg_marquardt(residual, x0);
  const auto& x = res.x;
  if (!x.allFinite() || !(x[0] > 0.0) || !(x[2] > 0.05))
    throw Error(Errc::FitDiverged, "chevron fit did not converge to an oscillating solution");
  ChevronFit f;
  f.g = std::abs(x[0]) * unit;
  f.center = x[1] * unit;
  f.scale = x[2];
  f.offset = x[3];
  const auto cov = res.covariance();
  f.g_err = std::sqrt(std::max(0.0, cov(0, 0))) * unit;
  f.center_err = std::sqrt(std::max(0.0, cov(1, 1))) * unit;
  f.rms = std::sqrt(2.0 * res.cost / static_cast<double>(nd * nt));
  return f;
}

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

double checked_amplitude(double a) {
  if (!(a > 0.0 && a <= 1.5)) throw Error(Errc::OutOfRange, "corrected pulse amplitude outside [0, 1.5]");
  return a;
}

}  // namespace

CalibrationResult calibrate_iswap(const VirtualDevice& dev, const CalibrationOptions& opt) {
  if (opt.max_k < 0 || opt.max_k > 6) throw Error(Errc::OutOfRange, "max_k must lie in [0, 6]");
  const double tau = dev.noise().gate_duration_2q;
  CalibrationResult out;

  // 1. Rough theta_p from the chevron.
  const double gnom = kPi / (2.0 * tau);
  auto dets = opt.chevron_detunings.empty() ? linspace(-4.0 * gnom, 4.0 * gnom, 25) : opt.chevron_detunings;
  auto times = opt.chevron_times.empty() ? linspace(0.0, 5.0 * tau, 41) : opt.chevron_times;
  out.chevron = rough_chevron_fit(run_chevron(dev, dets, times, opt.shots, derive_seed(opt.seed, 1)));
  out.theta_p_rough = out.chevron.g * tau;
  out.amplitude_rough = checked_amplitude(kPi / (2.0 * out.theta_p_rough));

  auto source = [&](RpeTarget t, const RpePulseSettings& s) {
    return [&dev, t, s](std::uint64_t n, std::uint64_t shots, std::uint64_t seed) {
      return measure_rpe_pair(dev, t, n, s, shots, seed);
    };
  };
  const RpePulseSettings rough{out.amplitude_rough, out.amplitude_rough / 2, opt.alternate_ym};

  // 2. Rough theta_s, theta_d from a single repetition.
  out.theta_s_rough =
      rpe_update(0.0, measure_rpe_pair(dev, RpeTarget::ThetaS, 1, rough, opt.shots, derive_seed(opt.seed, 2)), 0, 1.0);
  out.theta_d_rough =
      rpe_update(0.0, measure_rpe_pair(dev, RpeTarget::ThetaD, 1, rough, opt.shots, derive_seed(opt.seed, 3)), 0, 1.0);

  // 3. theta_p at the rough amplitude, rescaled to unit amplitude.
  out.rpe_p = run_rpe(RpeTarget::ThetaP, source(RpeTarget::ThetaP, rough), out.theta_p_rough * out.amplitude_rough,
                      {opt.max_k, opt.shots, derive_seed(opt.seed, 4)});
  out.theta_p = out.rpe_p.theta / out.amplitude_rough;
  out.amplitude = checked_amplitude(kPi / (2.0 * out.theta_p));

  // 4-5. Stark sum and difference at the corrected amplitude.
  const RpePulseSettings cal{out.amplitude, out.amplitude / 2, opt.alternate_ym};
  const double stark = std::pow(out.amplitude / out.amplitude_rough, 2);
  out.rpe_s = run_rpe(RpeTarget::ThetaS, source(RpeTarget::ThetaS, cal), out.theta_s_rough * stark,
                      {opt.max_k, opt.shots, derive_seed(opt.seed, 5)});
  out.rpe_d = run_rpe(RpeTarget::ThetaD, source(RpeTarget::ThetaD, cal), out.theta_d_rough * stark,
                      {std::max(0, opt.max_k - 1), opt.shots, derive_seed(opt.seed, 6)});
  out.theta_s = out.rpe_s.theta;
  out.theta_d = out.rpe_d.theta;
  out.theta_1 = (out.theta_s + out.theta_d) / 2;
  out.theta_2 = (out.theta_s - out.theta_d) / 2;
  out.vz1 = -out.theta_1;
  out.vz2 = -out.theta_2;
  return out;
}

}  // namespace dtc
