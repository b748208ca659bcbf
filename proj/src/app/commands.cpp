#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <unistd.h>

#include "dtc/app.hpp"
#include "dtc/benchmarking.hpp"
#include "dtc/error.hpp"
#include "dtc/rng.hpp"
#include "dtc/rpe.hpp"
#include "dtc/tomography.hpp"

namespace dtc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Row-oriented CSV text with a header.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { row_strings(header); }
  void row(const std::vector<double>& v) {
    std::vector<std::string> s;
    char buf[40];
    for (double x : v) {
      std::snprintf(buf, sizeof buf, "%.12g", x);
      s.emplace_back(buf);
    }
    row_strings(s);
  }
  void row_strings(const std::vector<std::string>& v) {
    if (v.size() != width_) throw Error(Errc::DimensionMismatch, "CSV row width");
    for (std::size_t i = 0; i < v.size(); ++i) text_ += (i ? "," : "") + v[i];
    text_ += "\n";
  }
  const std::string& str() const { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

struct Context {
  const RunConfig& cfg;
  std::map<std::string, std::string> tables;  // file name -> CSV
  json results = json::object();

  VirtualDevice device() const { return VirtualDevice(cfg.truth, cfg.noise); }
  double hz(double rad) const { return rad / kTwoPi; }
};

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

json fit_json(const DecayFit& f) {
  return {{"A", f.A},          {"p", f.p},         {"B", f.B},
          {"d", f.d},          {"r", f.r},         {"p_err", f.p_err},
          {"r_err", f.r_err},  {"p_ci95", {f.p - 1.96 * f.p_err, std::min(1.0, f.p + 1.96 * f.p_err)}},
          {"reduced_chi2", f.reduced_chi2}};
}

std::string curve_csv(const std::vector<const RbCurve*>& curves) {
  std::vector<std::string> head{"m"};
  for (const auto* c : curves) {
    head.push_back(std::string("mean_") + rb_observable_name(c->observable));
    head.push_back(std::string("stderr_") + rb_observable_name(c->observable));
  }
  Csv csv(head);
  for (std::size_t i = 0; i < curves[0]->lengths.size(); ++i) {
    std::vector<double> r{static_cast<double>(curves[0]->lengths[i])};
    for (const auto* c : curves) {
      r.push_back(c->mean[i]);
      r.push_back(c->stderr_mean[i]);
    }
    csv.row(r);
  }
  return csv.str();
}

// Sequence seeds for exact regeneration with rb_clifford_sequence.
std::string manifest_csv(const RbCurve& c) {
  Csv csv({"m", "seed_index", "sequence_seed"});
  for (std::size_t l = 0; l < c.lengths.size(); ++l)
    for (std::size_t s = 0; s < c.seeds[l].size(); ++s)
      csv.row_strings({std::to_string(c.lengths[l]), std::to_string(s), std::to_string(c.seeds[l][s])});
  return csv.str();
}

CalibrationResult calibrate(const Context& ctx, const VirtualDevice& dev) {
  CalibrationOptions o;
  o.max_k = ctx.cfg.calibrate.max_k;
  o.shots = ctx.cfg.shots;
  o.seed = derive_seed(ctx.cfg.seed, 101);
  o.alternate_ym = ctx.cfg.calibrate.alternate_ym;
  return calibrate_iswap(dev, o);
}

json calibration_json(const CalibrationResult& r) {
  return {{"theta_p_rough", r.theta_p_rough}, {"amplitude_rough", r.amplitude_rough},
          {"theta_s_rough", r.theta_s_rough}, {"theta_d_rough", r.theta_d_rough},
          {"theta_p", r.theta_p},             {"amplitude", r.amplitude},
          {"theta_s", r.theta_s},             {"theta_d", r.theta_d},
          {"theta_1", r.theta_1},             {"theta_2", r.theta_2},
          {"vz1", r.vz1},                     {"vz2", r.vz2},
          {"chevron_g_hz", r.chevron.g / kTwoPi}};
}

RbOptions rb_options(const Context& ctx, const GateCalibration& cal, std::uint64_t stream) {
  RbOptions o;
  o.lengths = ctx.cfg.rb.lengths;
  o.seeds_per_length = ctx.cfg.rb.seeds_per_length;
  o.shots = ctx.cfg.shots;
  o.seed = derive_seed(ctx.cfg.seed, stream);
  o.calibration = cal;
  return o;
}

GateCalibration maybe_calibrate(Context& ctx, const VirtualDevice& dev, bool enabled) {
  if (!enabled) return {};
  const auto r = calibrate(ctx, dev);
  ctx.results["calibration"] = calibration_json(r);
  return r.gate_calibration();
}

void spectrum(Context& ctx) {
  const auto& s = ctx.cfg.spectrum;
  const auto rows = flux_sweep(ctx.cfg.circuit, linspace(s.phi_min, s.phi_max, s.points));
  Csv csv({"phi_c", "g_eff_hz", "gzz_pert_hz", "gzz_spec_hz"});
  double best = INFINITY, best_phi = NAN;
  for (const auto& r : rows) {
    csv.row({r.phi_c, ctx.hz(r.g_eff), ctx.hz(r.g_zz_pert), ctx.hz(r.g_zz_spec)});
    if (std::isfinite(r.g_zz_spec) && std::abs(r.g_zz_spec) < best) {
      best = std::abs(r.g_zz_spec);
      best_phi = r.phi_c;
    }
  }
  ctx.tables["spectrum.csv"] = csv.str();
  const auto min = find_cancellation_flux(ctx.cfg.circuit, CancellationObjective::MinAbsGzzSpectral, s.search_lo,
                                          s.search_hi);
  const auto root = find_cancellation_flux(ctx.cfg.circuit, CancellationObjective::GeffRoot, s.search_lo, s.search_hi);
  ctx.results["grid_min_abs_gzz_phi"] = best_phi;
  ctx.results["grid_min_abs_gzz_hz"] = best / kTwoPi;
  ctx.results["cancellation_phi"] = min.phi_c;
  ctx.results["cancellation_gzz_hz"] = ctx.hz(zz_spectral(ctx.cfg.circuit, min).gzz);
  ctx.results["geff_root_phi"] = root.phi_c;
}

void chevron(Context& ctx) {
  const auto dev = ctx.device();
  const double tau = ctx.cfg.noise.gate_duration_2q;
  const double gnom = kPi / (2.0 * tau);
  const auto map = run_chevron(dev, linspace(-4 * gnom, 4 * gnom, 25), linspace(0.0, 5 * tau, 41), ctx.cfg.shots,
                               derive_seed(ctx.cfg.seed, 1));
  Csv csv({"detuning_hz", "time_ns", "population"});
  for (std::size_t d = 0; d < map.detunings.size(); ++d)
    for (std::size_t t = 0; t < map.times.size(); ++t)
      csv.row({ctx.hz(map.detunings[d]), map.times[t] * 1e9, map.population[d][t]});
  ctx.tables["chevron.csv"] = csv.str();
  const auto f = rough_chevron_fit(map);
  ctx.results["g_hz"] = ctx.hz(f.g);
  ctx.results["g_err_hz"] = ctx.hz(f.g_err);
  ctx.results["center_hz"] = ctx.hz(f.center);
  ctx.results["scale"] = f.scale;
  ctx.results["offset"] = f.offset;
  ctx.results["rms"] = f.rms;
  ctx.results["full_transfer_time_ns"] = kPi / (2.0 * f.g) * 1e9;
}

void calibrate_cmd(Context& ctx) {
  const auto r = calibrate(ctx, ctx.device());
  ctx.results = calibration_json(r);
  Csv csv({"target", "k", "n_reps", "sin", "cos", "theta", "retries"});
  for (const auto* e : {&r.rpe_p, &r.rpe_s, &r.rpe_d}) {
    ctx.results[std::string("uncertainty_") + rpe_target_name(e->target)] = e->uncertainty();
    for (const auto& g : e->generations) {
      char buf[3][32];
      std::snprintf(buf[0], 32, "%.12g", g.pair.sin_value);
      std::snprintf(buf[1], 32, "%.12g", g.pair.cos_value);
      std::snprintf(buf[2], 32, "%.12g", g.theta);
      csv.row_strings({rpe_target_name(e->target), std::to_string(g.k), std::to_string(g.n_reps), buf[0], buf[1],
                       buf[2], std::to_string(g.retries)});
    }
  }
  ctx.tables["calibrate_rpe.csv"] = csv.str();
}

void tomography(Context& ctx) {
  const auto dev = ctx.device();
  const auto cal = maybe_calibrate(ctx, dev, ctx.cfg.tomography.calibrate);
  const auto gate = lower_terms({GateTerm::iswap()}, cal);
  const auto data = run_tomography(dev, gate, ctx.cfg.shots, derive_seed(ctx.cfg.seed, 201));
  const auto chi = reconstruct_chi(data);
  const auto th = chi_from_unitary(ideal_iswap());
  const auto kraus = kraus_decompose(chi);
  const double fid = gate_fidelity(std::clamp(process_fidelity(chi, th), 0.0, 1.0));
  const auto boot = bootstrap_confidence(data, th, ctx.cfg.tomography.bootstrap, derive_seed(ctx.cfg.seed, 202));
  json weights = json::array();
  for (std::size_t i = 0; i < 4 && i < kraus.size(); ++i) weights.push_back(kraus[i].weight);
  ctx.results["gate_fidelity"] = fid;
  ctx.results["gate_fidelity_ci95"] = {boot.gate_fidelity.lo, boot.gate_fidelity.hi};
  ctx.results["phi_zz"] = extract_phi_zz(kraus.front().op);
  ctx.results["phi_zz_ci95"] = {boot.phi_zz.lo, boot.phi_zz.hi};
  ctx.results["kraus_weights"] = weights;
  ctx.results["tp_violation"] = chi.tp_violation;
  ctx.results["iterations"] = chi.iterations;
  ctx.results["decoherence_limited_fidelity"] =
      decoherence_limited_fidelity(ctx.cfg.noise, ctx.cfg.noise.gate_duration_2q);
  Csv csv({"row", "col", "magnitude", "phase"});
  for (const auto& c : hinton_export(chi)) {
    char m[32], p[32];
    std::snprintf(m, 32, "%.12g", c.magnitude);
    std::snprintf(p, 32, "%.12g", c.phase);
    csv.row_strings({c.row, c.col, m, p});
  }
  ctx.tables["tomography_chi.csv"] = csv.str();
}

void rb(Context& ctx) {
  const auto dev = ctx.device();
  const auto cal = maybe_calibrate(ctx, dev, ctx.cfg.rb.calibrate);
  const CliffordGroup group;
  const auto c = run_standard_rb(dev, group, rb_options(ctx, cal, 301));
  ctx.results["fit"] = fit_json(fit_decay(c, 4));
  ctx.tables["rb_curve.csv"] = curve_csv({&c});
  ctx.tables["rb_sequences.csv"] = manifest_csv(c);
}

void rb_interleaved(Context& ctx) {
  const auto dev = ctx.device();
  const auto cal = maybe_calibrate(ctx, dev, ctx.cfg.rb.calibrate);
  const CliffordGroup group;
  const auto c = run_interleaved_rb(dev, group, rb_options(ctx, cal, 302));
  const auto fs = fit_decay(c.standard, 4), fi = fit_decay(c.interleaved, 4);
  const double f = interleaved_fidelity(fs, fi);
  // First-order propagation of the two p uncertainties.
  const double df = 0.75 * std::hypot(fi.p_err / fs.p, fi.p * fs.p_err / (fs.p * fs.p));
  ctx.results["fit_standard"] = fit_json(fs);
  ctx.results["fit_interleaved"] = fit_json(fi);
  ctx.results["iswap_fidelity"] = f;
  ctx.results["iswap_fidelity_err"] = df;
  ctx.results["decoherence_limited_fidelity"] =
      decoherence_limited_fidelity(ctx.cfg.noise, ctx.cfg.noise.gate_duration_2q);
  ctx.tables["rb_interleaved_standard.csv"] = curve_csv({&c.standard});
  ctx.tables["rb_interleaved_interleaved.csv"] = curve_csv({&c.interleaved});
  ctx.tables["rb_interleaved_sequences.csv"] = manifest_csv(c.standard);
}

void rb_sim(Context& ctx) {
  const auto dev = ctx.device();
  const CliffordGroup group;
  const auto c = run_simultaneous_rb(dev, group, rb_options(ctx, {}, 303));
  const auto a = fit_decay(c.z1, 2), b = fit_decay(c.z2, 2), z = fit_decay(c.z1z2, 4);
  const double sigma = std::sqrt(std::pow(a.p_err * b.p, 2) + std::pow(b.p_err * a.p, 2) + std::pow(z.p_err, 2));
  ctx.results["fit_z1"] = fit_json(a);
  ctx.results["fit_z2"] = fit_json(b);
  ctx.results["fit_z1z2"] = fit_json(z);
  ctx.results["product_p"] = a.p * b.p;
  ctx.results["product_deviation"] = z.p - a.p * b.p;
  ctx.results["product_deviation_sigma"] = sigma;
  ctx.tables["rb_sim_curves.csv"] = curve_csv({&c.z1, &c.z2, &c.z1z2});
  ctx.tables["rb_sim_sequences.csv"] = manifest_csv(c.z1);
}

void jazz(Context& ctx) {
  const auto dev = ctx.device();
  JazzOptions o;
  o.delays = linspace(0.0, ctx.cfg.jazz.delay_max, ctx.cfg.jazz.points);
  o.detuning_hz = ctx.hz(ctx.cfg.jazz.detuning);
  o.shots = ctx.cfg.shots;
  o.seed = derive_seed(ctx.cfg.seed, 401);
  const auto g = run_jazz(dev, Q2State::Ground, o);
  const auto e = run_jazz(dev, Q2State::Excited, o);
  ctx.results["frequency_ground_hz"] = g.frequency_hz;
  ctx.results["frequency_excited_hz"] = e.frequency_hz;
  ctx.results["frequency_err_hz"] = {g.frequency_err_hz, e.frequency_err_hz};
  ctx.results["gzz_hz"] = ctx.hz(jazz_extract_gzz(g.frequency_hz, e.frequency_hz));
  Csv csv({"delay_ns", "z1_ground", "z1_excited"});
  for (std::size_t i = 0; i < g.delays.size(); ++i) csv.row({g.delays[i] * 1e9, g.z1[i], e.z1[i]});
  ctx.tables["jazz.csv"] = csv.str();
}

const std::map<std::string, std::function<void(Context&)>>& registry() {
  static const std::map<std::string, std::function<void(Context&)>> r{
      {"spectrum", spectrum}, {"chevron", chevron}, {"calibrate", calibrate_cmd},   {"tomography", tomography},
      {"rb", rb},             {"rb-interleaved", rb_interleaved}, {"rb-sim", rb_sim}, {"jazz", jazz}};
  return r;
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> n{"spectrum", "chevron",        "calibrate", "tomography",
                                          "rb",       "rb-interleaved", "rb-sim",    "jazz"};
  return n;
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(Errc::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(Errc::IoError, "cannot rename onto " + target.string() + ": " + ec.message());
  }
}

json run_subcommand(const std::string& name, const RunConfig& cfg) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw Error(Errc::ConfigInvalid, "unknown subcommand " + name, "command");
  Context ctx{cfg, {}, json::object()};
  it->second(ctx);

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = name;
  doc["seed"] = cfg.seed;
  doc["shots"] = cfg.shots;
  doc["rng"] = kRngAlgorithm;
  doc["config"] = format_config(cfg);
  doc["results"] = ctx.results;
  json files = json::array();
  for (const auto& [file, text] : ctx.tables) {
    write_atomic((fs::path(cfg.out) / file).string(), text);
    files.push_back(file);
  }
  doc["tables"] = files;
  write_atomic((fs::path(cfg.out) / (name + ".json")).string(), doc.dump(2) + "\n");
  return doc;
}

json error_record(const std::string& name, Errc code, const std::string& message, const std::string& field) {
  json e{{"code", errc_name(code)}, {"message", message}};
  if (!field.empty()) e["field"] = field;
  return {{"schema_version", kSchemaVersion}, {"command", name}, {"error", e}};
}

}  // namespace dtc
