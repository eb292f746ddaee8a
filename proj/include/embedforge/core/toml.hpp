#pragma once

#include <string>

#include <json.hpp>

namespace embedforge {

// Minimal TOML-subset reader for the human-editable manifests (campaign
// plans, data mixes, evaluation task lists). Supports comments, [table] and
// [[array-of-table]] headers, bare keys, strings, integers, floats,
// booleans, and flat arrays of scalars. Parsed into a JSON document so
// manifests may equivalently be supplied as .json files.
nlohmann::json parse_toml(const std::string& text);

nlohmann::json load_toml_file(const std::string& path);

// Dispatches on extension: .toml via parse_toml, everything else as JSON.
nlohmann::json load_config_file(const std::string& path);

}  // namespace embedforge
