#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "dtc/config.hpp"
#include "dtc/error.hpp"

namespace dtc {

inline constexpr int kSchemaVersion = 1;

const std::vector<std::string>& subcommand_names();

// Runs one experiment and writes <out>/<name>.json plus its CSV tables.
// Returns the JSON document that was written.
nlohmann::json run_subcommand(const std::string& name, const RunConfig& cfg);

// Machine-readable record of a failure.
nlohmann::json error_record(const std::string& name, Errc code, const std::string& message,
                            const std::string& field);

// Write to a temporary sibling, then rename over the target.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace dtc
