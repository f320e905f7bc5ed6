#pragma once

#include <string>

#include "platoon_mpc/sim.hpp"

namespace platoon_mpc {

/// Parse a scenario from JSON text.
///
/// Vehicle references inside `events` are 1-based, matching how the
/// documentation numbers platoon members; they are converted to 0-based
/// indices on the parsed Scenario. Throws InvalidInput naming the offending
/// field. The parsed scenario is validated before it is returned.
Scenario parse_scenario(const std::string& json_text);

/// Read `path` and parse it with parse_scenario. Throws InvalidInput if the
/// file cannot be read.
Scenario load_scenario(const std::string& path);

/// Serialize a scenario to pretty-printed JSON text that parse_scenario
/// round-trips. Event vehicle indices are written 1-based.
std::string scenario_to_json(const Scenario& scenario);

} // namespace platoon_mpc
