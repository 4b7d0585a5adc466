#pragma once

#include "pantilt/sim.hpp"

#include <string>

namespace pantilt::sim {

// Parse a scenario from JSON text. Malformed JSON raises ParseError with the
// line/column from the parser; structurally valid JSON with bad content
// (wrong types, unknown trajectory, out-of-range values, missing or wrong
// schema_version) raises ConfigError. `source_name` labels diagnostics and is
// the default scenario name.
Scenario load_scenario(const std::string& json_text, const std::string& source_name);

// Read the file and parse it; unreadable files raise ParseError.
Scenario load_scenario_file(const std::string& path);

} // namespace pantilt::sim
