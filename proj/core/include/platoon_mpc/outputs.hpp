#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "platoon_mpc/sim.hpp"

namespace platoon_mpc {

/// FNV-1a 64-bit hash (hex) of the canonical JSON serialization of the
/// scenario. Two runs report the same hash iff they were configured
/// identically.
std::string scenario_hash(const Scenario& scenario);

/// Write one CSV row per telemetry record. Columns, in order:
///   t,
///   p1..pM, v1..vM, a1..aM, u1..uM   (per-vehicle state and applied input)
///   gap1..gap{M-1}                   (gap_i = p_i - p_{i+1})
///   v_ref, a_ref                     (leader reference)
///   human                            (one char per vehicle, '1' = human)
///   status, iterations, active_count, fallback, prediction_error
/// Doubles are printed with round-trip precision. A zero-duration run writes
/// only the header row.
void write_timeseries_csv(const std::string& path, const Scenario& scenario,
                          const Telemetry& telemetry);

/// Write run metadata plus the invariant audit as pretty-printed JSON.
/// `seed` is the noise seed the run actually used (absent when noise was
/// disabled).
void write_summary_json(const std::string& path, const Scenario& scenario,
                        const Telemetry& telemetry, const InvariantReport& report,
                        std::optional<std::uint64_t> seed);

} // namespace platoon_mpc
