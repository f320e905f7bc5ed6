#pragma once

#include <optional>
#include <span>

#include "platoon_mpc/types.hpp"

namespace platoon_mpc {

/// Exact zero-order-hold discretization of one vehicle's longitudinal
/// dynamics (position, velocity, acceleration with first-order drivetrain
/// lag tau driven by commanded acceleration u).
struct VehicleDiscrete {
  Mat a;     ///< 3x3 state transition
  Vec b;     ///< 3x1 input column
  double dt; ///< sample time [s]
};

/// Block-stacked discrete model of the whole platoon with state ordering
/// [all positions, all velocities, all accelerations].
struct PlatoonModel {
  Index m = 0;                         ///< number of vehicles
  Mat a_m;                             ///< 3M x 3M transition
  Mat b_m;                             ///< 3M x M input map
  double dt = 0.0;                     ///< sample time [s]
  std::vector<VehicleParams> vehicles; ///< per-vehicle parameters
};

/// Stacked prediction operators mapping the current state, the held control
/// and the stacked control increments to the predicted state trajectory
/// over `horizon` steps:
///   X_stack = phi * x + lambda * u_prev + gamma * delta_u_stack.
struct PredictionMatrices {
  Mat phi;      ///< (S*N) x S,   S = state dim
  Mat lambda;   ///< (S*N) x I,   I = input dim
  Mat gamma;    ///< (S*N) x (I*N), block lower triangular
  Index horizon = 0;
};

/// Closed-form exact discretization at sample time dt.
/// Throws InvalidParameter for tau <= 0 or dt <= 0.
VehicleDiscrete discretize_vehicle(const VehicleParams& vehicle, double dt);

/// Assemble the stacked platoon transition/input matrices from per-vehicle
/// discretizations. Throws InvalidParameter for an empty vehicle list.
PlatoonModel build_platoon_model(std::span<const VehicleParams> vehicles, double dt);

/// Prediction operators for the platoon model over `horizon` steps
/// (horizon >= 1).
PredictionMatrices build_prediction(const PlatoonModel& model, Index horizon);

/// Prediction operators for a single vehicle (3-state) model over
/// `horizon` steps; used for the human-driver prediction subproblem.
PredictionMatrices build_human_prediction(const VehicleDiscrete& vehicle, Index horizon);

/// One simulation step of the platoon plant.
///
/// The applied control is u_prev + delta_u; `noise`, when present, is an
/// additive 3M disturbance on the successor state.
/// Returns the successor state and the control that was applied.
struct StepResult {
  PlatoonState state;
  Vec applied_u;
};
StepResult step_platoon(const PlatoonModel& model, const PlatoonState& state,
                        const Vec& u_prev, const Vec& delta_u,
                        const std::optional<Vec>& noise = std::nullopt);

} // namespace platoon_mpc
