#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "dtc/app.hpp"
#include "dtc/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dtclab: double-transmon-coupler iSWAP laboratory"};
  app.require_subcommand(1);
  std::string config_path, out;
  std::uint64_t seed = 0, shots = 0;
  auto* o_config = app.add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
  auto* o_seed = app.add_option("--seed", seed, "master seed");
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_shots = app.add_option("--shots", shots, "shots per circuit, 0 for exact expectations");
  const std::map<std::string, std::string> about{
      {"spectrum", "coupling and ZZ versus coupler flux, cancellation point"},
      {"chevron", "red-sideband chevron map and rough coupling fit"},
      {"calibrate", "RPE calibration of the iSWAP"},
      {"tomography", "process tomography of the (calibrated) iSWAP"},
      {"rb", "standard two-qubit randomized benchmarking"},
      {"rb-interleaved", "interleaved RB of the iSWAP"},
      {"rb-sim", "simultaneous single-qubit RB with the ZZ correlator"},
      {"jazz", "JAZZ echo measurement of the residual ZZ"},
  };
  for (const auto& name : dtc::subcommand_names()) app.add_subcommand(name, about.at(name))->fallthrough();
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  // Output directory precedence: --out, DTCLAB_OUT, config, default.
  const char* env = std::getenv("DTCLAB_OUT");
  std::string out_dir = o_out->count() ? out : env ? env : "results";
  try {
    auto cfg = o_config->count() ? dtc::load_config(config_path) : dtc::RunConfig{};
    if (env) cfg.out = env;
    if (o_out->count()) cfg.out = out;
    if (o_seed->count()) cfg.seed = seed;
    if (o_shots->count()) cfg.shots = shots;
    out_dir = cfg.out;
    const auto doc = dtc::run_subcommand(name, cfg);
    std::printf("%s: wrote %s/%s.json\n", name.c_str(), cfg.out.c_str(), name.c_str());
    return 0;
  } catch (const dtc::Error& e) {
    const auto rec = dtc::error_record(name, e.code(), e.what(), e.field());
    std::cerr << rec.dump() << "\n";
    try {
      dtc::write_atomic((std::filesystem::path(out_dir) / "error.json").string(), rec.dump(2) + "\n");
    } catch (const std::exception&) {
    }
    return e.code() == dtc::Errc::ConfigInvalid ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << dtc::error_record(name, dtc::Errc::IoError, e.what(), "").dump() << "\n";
    return 1;
  }
}
