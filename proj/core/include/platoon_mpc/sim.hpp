#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "platoon_mpc/controller.hpp"
#include "platoon_mpc/types.hpp"

namespace platoon_mpc {

/// Timed scenario event. Times are in seconds and must be exact multiples of
/// the scenario sample time.
struct Event {
  enum class Kind { takeover, release, set_headway };

  Kind kind = Kind::takeover;
  double time = 0.0;
  Index vehicle = 0; ///< 0-based vehicle index

  /// takeover only: piecewise-constant target-velocity profile (time, v);
  /// the scripted driver tracks the entry with the latest time <= now.
  std::vector<std::pair<double, double>> profile;

  /// set_headway only: new constant time headway [s].
  double headway = 0.0;
};

/// Zero-mean Gaussian process noise on the acceleration states.
struct NoiseConfig {
  std::uint64_t seed = 0;
  std::vector<double> accel_std; ///< one standard deviation per vehicle
};

struct Scenario {
  std::string name = "scenario";
  std::vector<VehicleParams> vehicles;
  double dt = 0.1;
  double duration_s = 0.0;
  double v_d = 0.0;
  Index k_m = 1;
  Index horizon = 1;
  CostWeights weights;
  ConstraintSpec constraints;
  std::vector<Event> events;
  std::optional<std::vector<double>> initial_positions;
  std::optional<std::vector<double>> initial_velocities;
  std::optional<std::vector<double>> initial_accelerations;
  std::optional<NoiseConfig> noise;

  Index vehicle_count() const { return static_cast<Index>(vehicles.size()); }

  /// Throws InvalidInput/InvalidParameter with the offending field in the
  /// message.
  void validate() const;
};

/// One control cycle of a finished run.
struct TelemetryRecord {
  Index k = 0;
  double t = 0.0;
  Vec x;                  ///< 3M state at sample k
  Vec u;                  ///< control applied at k (human action included)
  Vec delta_u;            ///< increment applied at k
  Vec x_ref;              ///< 3M reference at sample k
  std::vector<bool> mask; ///< true where human-controlled at k
  QpStatus status = QpStatus::optimal;
  int iterations = 0;
  Index active_count = 0;
  bool fallback = false;
  double prediction_error = 0.0; ///< inf-norm of (realized - predicted) state at k
};

struct Telemetry {
  Index m = 0;
  double dt = 0.0;
  std::vector<TelemetryRecord> records;
};

/// Initial platoon state: overrides from the scenario, otherwise vehicles at
/// rest with front-to-front spacing d_min + 10 m.
PlatoonState initial_conditions(const Scenario& scenario);

/// Run the closed loop: one controller invocation per sample over
/// duration_s/dt + 1 samples (a zero-duration scenario yields an empty
/// record list). `seed_override` replaces the scenario noise seed.
Telemetry run_scenario(const Scenario& scenario,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

/// Post-hoc constraint audit of a finished run.
struct InvariantReport {
  int state_violations = 0;  ///< bound/gap violations chargeable to the controller
  int human_violations = 0;  ///< bound violations of human-driven vehicles
  double min_gap = 0.0;
  double max_gap = 0.0;
  double min_velocity = 0.0;
  double max_velocity = 0.0;
  double min_accel = 0.0;
  double max_accel = 0.0;
  int fallback_steps = 0;
  int human_steps = 0;

  bool ok() const { return state_violations == 0; }
};
InvariantReport check_invariants(const Telemetry& telemetry, const Scenario& scenario);

} // namespace platoon_mpc
