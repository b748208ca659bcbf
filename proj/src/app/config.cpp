#include "dtc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "dtc/error.hpp"

namespace dtc {

TrueGateParams RunConfig::default_truth() {
  TrueGateParams t;
  t.residual_gzz = -kTwoPi * 220e3;
  return t;
}

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(Errc::ConfigInvalid, field + ": " + why, field);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Quantity {
  double value;
  std::string token, unit;
};

// Leading number, its text and the trimmed remainder.
Quantity split_number(const std::string& text, const std::string& field, bool allow_inf = false) {
  const auto t = trim(text);
  if (t.empty()) invalid(field, "empty value");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || std::isnan(v) || (std::isinf(v) && !(allow_inf && v > 0)))
    invalid(field, "expected a number, got '" + t + "'");
  return {v, t.substr(0, end - t.c_str()), trim(std::string(end))};
}

// Number token rescaled by 10^exp10 in decimal, then rounded once.
double scaled_decimal(const std::string& token, int exp10) {
  const auto e = token.find_first_of("eE");
  const std::string mant = token.substr(0, e);
  const int exp = e == std::string::npos ? 0 : std::atoi(token.c_str() + e + 1);
  return std::strtod((mant + "e" + std::to_string(exp + exp10)).c_str(), nullptr);
}

// Shortest decimal text of x, written as x / 10^exp10.
std::string decimal_text(double x, int exp10) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[64];
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*e", p - 1, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  std::string t(buf);
  const auto e = t.find('e');
  int exp = std::atoi(t.c_str() + e + 1) - exp10;
  std::string mant = t.substr(0, e);
  std::string sign;
  if (mant[0] == '-') {
    sign = "-";
    mant.erase(0, 1);
  }
  std::string digits = mant.substr(0, 1) + (mant.size() > 2 ? mant.substr(2) : "");
  if (digits == "0") return sign + "0";
  if (exp < -6 || exp > 15) return sign + mant + "e" + std::to_string(exp);
  // Plain notation: the decimal point sits after digit exp + 1.
  const int point = exp + 1;
  if (point <= 0) return sign + "0." + std::string(-point, '0') + digits;
  if (point >= static_cast<int>(digits.size())) return sign + digits + std::string(point - digits.size(), '0');
  return sign + digits.substr(0, point) + "." + digits.substr(point);
}

int unit_exponent(const std::map<std::string, int>& units, const std::string& unit, const std::string& field,
                  const char* kind) {
  const auto it = units.find(unit);
  if (it == units.end()) invalid(field, std::string("expected a ") + kind + " unit, got '" + unit + "'");
  return it->second;
}

// Decimal exponent of each unit.
const std::map<std::string, int>& frequency_units() {
  static const std::map<std::string, int> u{{"GHz", 9}, {"MHz", 6}, {"kHz", 3}, {"Hz", 0}};
  return u;
}
const std::map<std::string, int>& time_units() {
  static const std::map<std::string, int> u{{"s", 0}, {"ms", -3}, {"us", -6}, {"\xC2\xB5s", -6}, {"ns", -9}};
  return u;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_plain(const std::string& text, const std::string& field) {
  const auto q = split_number(text, field);
  if (!q.unit.empty()) invalid(field, "unexpected unit '" + q.unit + "'");
  return q.value;
}

std::int64_t parse_int(const std::string& text, const std::string& field) {
  const auto t = trim(text);
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || *end != '\0') invalid(field, "expected an integer, got '" + t + "'");
  return v;
}

bool parse_bool(const std::string& text, const std::string& field) {
  const auto t = trim(text);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  invalid(field, "expected true or false, got '" + t + "'");
}

std::string plain(double v) { return decimal_text(v, 0); }

template <std::size_t N, class F>
std::array<double, N> parse_array(const std::string& text, const std::string& field, F each) {
  const auto items = split_list(text);
  if (items.size() != N) invalid(field, "expected " + std::to_string(N) + " comma-separated values");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = each(items[i], field);
  return out;
}

template <std::size_t N, class F>
std::string join(const std::array<double, N>& a, F each) {
  std::string s;
  for (std::size_t i = 0; i < N; ++i) s += (i ? ", " : "") + each(a[i]);
  return s;
}

struct Key {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};
using Table = std::vector<std::pair<std::string, std::vector<std::pair<std::string, Key>>>>;

template <class Ref>
Key frequency(Ref ref, const char* unit) {
  return {[ref](RunConfig& c, const std::string& v, const std::string& f) { ref(c) = parse_frequency(v, f); },
          [ref, unit](const RunConfig& c) { return format_frequency(ref(const_cast<RunConfig&>(c)), unit); }};
}
template <class Ref>
Key time_key(Ref ref, const char* unit) {
  return {[ref](RunConfig& c, const std::string& v, const std::string& f) { ref(c) = parse_time(v, f); },
          [ref, unit](const RunConfig& c) { return format_time(ref(const_cast<RunConfig&>(c)), unit); }};
}
template <class Ref>
Key number(Ref ref) {
  return {[ref](RunConfig& c, const std::string& v, const std::string& f) { ref(c) = parse_plain(v, f); },
          [ref](const RunConfig& c) { return plain(ref(const_cast<RunConfig&>(c))); }};
}
template <class Ref>
Key integer(Ref ref) {
  return {[ref](RunConfig& c, const std::string& v, const std::string& f) {
            const auto i = parse_int(v, f);
            using T = std::remove_reference_t<decltype(ref(c))>;
            if (i < 0 && std::is_unsigned_v<T>) invalid(f, "must be nonnegative");
            ref(c) = static_cast<T>(i);
          },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}
template <class Ref>
Key boolean(Ref ref) {
  return {[ref](RunConfig& c, const std::string& v, const std::string& f) { ref(c) = parse_bool(v, f); },
          [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}
template <class Ref>
Key pair_of(Ref ref, int kind, const char* unit) {
  return {[ref, kind](RunConfig& c, const std::string& v, const std::string& f) {
            ref(c) = parse_array<2>(v, f, [kind](const std::string& s, const std::string& fl) {
              return kind == 0 ? parse_plain(s, fl) : kind == 1 ? parse_time(s, fl) : parse_frequency(s, fl);
            });
          },
          [ref, kind, unit](const RunConfig& c) {
            return join(ref(const_cast<RunConfig&>(c)), [kind, unit](double x) {
              return kind == 0 ? plain(x) : kind == 1 ? format_time(x, unit) : format_frequency(x, unit);
            });
          }};
}

#define REF(expr) [](RunConfig& c) -> auto& { return c.expr; }

const Table& table() {
  static const Table t{
      {"run",
       {{"seed", integer(REF(seed))},
        {"shots", integer(REF(shots))},
        {"out", {[](RunConfig& c, const std::string& v, const std::string&) { c.out = trim(v); },
                 [](const RunConfig& c) { return c.out; }}}}},
      {"device",
       {{"omega1", frequency(REF(circuit.omega[0]), "GHz")},
        {"omega2", frequency(REF(circuit.omega[1]), "GHz")},
        {"omega3", frequency(REF(circuit.omega[2]), "GHz")},
        {"omega4", frequency(REF(circuit.omega[3]), "GHz")},
        {"alpha1", frequency(REF(circuit.alpha[0]), "MHz")},
        {"alpha2", frequency(REF(circuit.alpha[1]), "MHz")},
        {"alpha3", frequency(REF(circuit.alpha[2]), "MHz")},
        {"alpha4", frequency(REF(circuit.alpha[3]), "MHz")},
        {"g13", frequency(REF(circuit.g13), "MHz")},
        {"g24", frequency(REF(circuit.g24), "MHz")},
        {"gc", frequency(REF(circuit.gC), "MHz")},
        {"ej5", frequency(REF(circuit.EJ5), "GHz")},
        {"ec3", frequency(REF(circuit.EC3), "GHz")},
        {"ec4", frequency(REF(circuit.EC4), "GHz")},
        {"flux_slope", pair_of(REF(circuit.flux_slope), 2, "MHz")},
        {"levels", integer(REF(circuit.levels_per_mode))},
        {"coupler_levels", integer(REF(circuit.coupler_levels))},
        {"counter_rotating", boolean(REF(circuit.counter_rotating))}}},
      {"device.noise",
       {{"t1", pair_of(REF(noise.t1), 1, "us")},
        {"t2", pair_of(REF(noise.t2), 1, "us")},
        {"gate_1q", time_key(REF(noise.gate_duration_1q), "ns")},
        {"gate_2q", time_key(REF(noise.gate_duration_2q), "ns")},
        {"depol_1q", number(REF(noise.depol_1q))},
        {"depol_2q", number(REF(noise.depol_2q))},
        {"depol_per_clifford", number(REF(noise.depol_per_clifford))},
        {"prep_error", pair_of(REF(noise.prep_error), 0, "")},
        {"readout_error",
         {[](RunConfig& c, const std::string& v, const std::string& f) {
            const auto e = parse_array<2>(v, f, parse_plain);
            for (int q = 0; q < 2; ++q) {
              if (!(e[q] >= 0.0 && e[q] <= 1.0)) invalid(f, "must be a probability");
              c.noise.readout[q] = {{{1.0 - e[q], e[q]}, {e[q], 1.0 - e[q]}}};
            }
          },
          [](const RunConfig& c) {
            return plain(c.noise.readout[0][0][1]) + ", " + plain(c.noise.readout[1][0][1]);
          }}}}},
      {"device.truth",
       {{"theta_p", number(REF(truth.gate.theta_p))},
        {"phi_p", number(REF(truth.gate.phi_p))},
        {"theta_1", number(REF(truth.gate.theta_1))},
        {"theta_2", number(REF(truth.gate.theta_2))},
        {"phi_zz", number(REF(truth.gate.phi_zz))},
        {"residual_gzz", frequency(REF(truth.residual_gzz), "kHz")},
        {"detuning", pair_of(REF(truth.detuning), 2, "kHz")},
        {"sq_over_rotation", pair_of(REF(truth.sq_over_rotation), 0, "")}}},
      {"spectrum",
       {{"phi_min", number(REF(spectrum.phi_min))},
        {"phi_max", number(REF(spectrum.phi_max))},
        {"points", integer(REF(spectrum.points))},
        {"search_lo", number(REF(spectrum.search_lo))},
        {"search_hi", number(REF(spectrum.search_hi))}}},
      {"calibrate", {{"max_k", integer(REF(calibrate.max_k))}, {"alternate_ym", boolean(REF(calibrate.alternate_ym))}}},
      {"tomography", {{"calibrate", boolean(REF(tomography.calibrate))}, {"bootstrap", integer(REF(tomography.bootstrap))}}},
      {"rb",
       {{"lengths",
         {[](RunConfig& c, const std::string& v, const std::string& f) {
            c.rb.lengths.clear();
            for (const auto& s : split_list(v)) c.rb.lengths.push_back(static_cast<int>(parse_int(s, f)));
          },
          [](const RunConfig& c) {
            std::string s;
            for (std::size_t i = 0; i < c.rb.lengths.size(); ++i) s += (i ? ", " : "") + std::to_string(c.rb.lengths[i]);
            return s;
          }}},
        {"seeds_per_length", integer(REF(rb.seeds_per_length))},
        {"calibrate", boolean(REF(rb.calibrate))}}},
      {"jazz",
       {{"detuning", frequency(REF(jazz.detuning), "MHz")},
        {"delay_max", time_key(REF(jazz.delay_max), "us")},
        {"points", integer(REF(jazz.points))}}},
  };
  return t;
}

#undef REF

void check(const RunConfig& c) {
  for (int q = 0; q < 2; ++q) {
    if (!(c.noise.t1[q] > 0.0)) invalid("device.noise.t1", "coherence times must be positive");
    if (!(c.noise.t2[q] > 0.0)) invalid("device.noise.t2", "coherence times must be positive");
    if (c.noise.t2[q] > 2.0 * c.noise.t1[q] * (1.0 + 1e-12))
      invalid("device.noise.t2", "unphysical: T2 exceeds 2 T1 on Q" + std::to_string(q + 1));
  }
  try {
    c.noise.validate();
  } catch (const Error& e) {
    invalid("device.noise", e.what());
  }
  try {
    c.circuit.validate();
  } catch (const Error& e) {
    invalid("device", e.what());
  }
  try {
    c.truth.validate();
  } catch (const Error& e) {
    invalid("device.truth", e.what());
  }
  if (!std::isfinite(c.noise.gate_duration_1q)) invalid("device.noise.gate_1q", "must be finite");
  if (!std::isfinite(c.noise.gate_duration_2q)) invalid("device.noise.gate_2q", "must be finite");
  if (!std::isfinite(c.jazz.delay_max)) invalid("jazz.delay_max", "must be finite");
  if (!(c.spectrum.phi_max > c.spectrum.phi_min)) invalid("spectrum.phi_max", "must exceed phi_min");
  if (c.spectrum.points < 2) invalid("spectrum.points", "need at least two points");
  if (!(c.spectrum.search_hi > c.spectrum.search_lo)) invalid("spectrum.search_hi", "must exceed search_lo");
  if (c.calibrate.max_k < 0 || c.calibrate.max_k > 6) invalid("calibrate.max_k", "must lie in [0, 6]");
  if (c.tomography.bootstrap < 2) invalid("tomography.bootstrap", "need at least two resamples");
  if (c.rb.lengths.size() < 4) invalid("rb.lengths", "need at least four lengths");
  for (std::size_t i = 0; i < c.rb.lengths.size(); ++i)
    if (c.rb.lengths[i] < 1 || (i > 0 && c.rb.lengths[i] <= c.rb.lengths[i - 1]))
      invalid("rb.lengths", "lengths must be positive and strictly increasing");
  if (c.rb.seeds_per_length < 1) invalid("rb.seeds_per_length", "must be positive");
  if (!(c.jazz.detuning > 0.0)) invalid("jazz.detuning", "must be positive");
  if (!(c.jazz.delay_max > 0.0)) invalid("jazz.delay_max", "must be positive");
  if (c.jazz.points < 8) invalid("jazz.points", "need at least eight delays");
}

}  // namespace

double parse_frequency(const std::string& text, const std::string& field) {
  const auto q = split_number(text, field);
  if (q.unit == "rad/s") return q.value;
  return kTwoPi * scaled_decimal(q.token, unit_exponent(frequency_units(), q.unit, field, "frequency"));
}

double parse_time(const std::string& text, const std::string& field) {
  const auto q = split_number(text, field, true);
  const int e = unit_exponent(time_units(), q.unit, field, "time");
  return std::isinf(q.value) ? q.value : scaled_decimal(q.token, e);
}

std::string format_frequency(double rad_per_s, const std::string& unit) {
  const int e = unit_exponent(frequency_units(), unit, "format", "frequency");
  // Shortest rate in Hz that maps exactly onto the stored angular rate.
  double hz = rad_per_s / kTwoPi;
  for (int step = 0; step < 8; ++step) hz = std::nextafter(hz, -INFINITY);
  std::string best;
  for (int step = 0; step < 17; ++step, hz = std::nextafter(hz, INFINITY)) {
    const auto s = decimal_text(hz, e) + " " + unit;
    if (parse_frequency(s, "format") == rad_per_s && (best.empty() || s.size() < best.size())) best = s;
  }
  if (!best.empty()) return best;
  return decimal_text(rad_per_s, 0) + " rad/s";
}

std::string format_time(double seconds, const std::string& unit) {
  return decimal_text(seconds, unit_exponent(time_units(), unit, "format", "time")) + " " + unit;
}

RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    invalid("line " + std::to_string(e.line()), e.message());
  }

  // The reader drops empty sections; find their headers directly.
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    const auto t = trim(line);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') continue;
    const auto name = t.substr(1, t.size() - 2);
    if (tree.find(name) != tree.not_found()) continue;
    if (std::none_of(table().begin(), table().end(), [&](const auto& e) { return e.first == name; }))
      invalid(name, "unknown section");
    if (name == "device.noise") invalid("device.noise.t1", "missing");
  }

  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) invalid(section, "key outside a section");
    const auto sec = std::find_if(table().begin(), table().end(), [&](const auto& s) { return s.first == section; });
    if (sec == table().end()) invalid(section, "unknown section");
    std::set<std::string> keys;
    for (const auto& [key, value] : body) {
      const std::string path = section + "." + key;
      if (!value.empty()) invalid(path, "nested keys are not supported");
      const auto k = std::find_if(sec->second.begin(), sec->second.end(), [&](const auto& e) { return e.first == key; });
      if (k == sec->second.end()) invalid(path, "unknown key");
      k->second.set(c, value.data(), path);
      keys.insert(key);
    }
    // A coherence block replaces the default profile and must be complete.
    if (section == "device.noise")
      for (const char* req : {"t1", "t2"})
        if (!keys.count(req)) invalid(std::string("device.noise.") + req, "missing");
  }
  check(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const RunConfig& c) {
  std::string s;
  for (const auto& [section, keys] : table()) {
    s += "[" + section + "]\n";
    for (const auto& [name, key] : keys) s += name + " = " + key.get(c) + "\n";
    s += "\n";
  }
  return s;
}

}  // namespace dtc
