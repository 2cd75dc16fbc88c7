/// @file config.hpp
/// @brief Flat key=value serialization of RunConfig, shared by the CLI
///        config-file parser and the summary.json echo.
#pragma once

#include <map>
#include <string>

#include "mmrelax/core.hpp"

namespace mmrelax {

/// "fixed:<tau>" or "adaptive:<tau_o>,<tau_min>,<tau_max>".
std::string tau_to_string(const TauPolicy& tau);

/// Accepts "fixed:<v>" and "adaptive[:<tau_o>[,<min>,<max>]]" (defaults fill
/// omitted fields).  Throws std::invalid_argument on bad grammar.
TauPolicy tau_from_string(const std::string& text);

std::map<std::string, std::string> config_to_map(const RunConfig& config);
RunConfig config_from_map(const std::map<std::string, std::string>& entries);

/// Applies one key=value entry.  Throws std::invalid_argument naming the key
/// on unknown keys or malformed values.
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);

/// Reads a flat key=value file ('#' starts a comment line).
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

}  // namespace mmrelax
