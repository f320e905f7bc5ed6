#pragma once

#include "platoon_mpc/dynamics.hpp"
#include "platoon_mpc/qp.hpp"
#include "platoon_mpc/types.hpp"

namespace platoon_mpc {

/// Predicted control increments of a human-driven vehicle over the horizon.
struct HumanPrediction {
  Vec delta_u_seq;               ///< horizon increments (zero = holds current command)
  bool binding = false;          ///< a velocity/acceleration bound shaped the prediction
  QpStatus status = QpStatus::optimal;
  int iterations = 0;
};

/// Minimum-deviation prediction of a human driver: the smallest control
/// increments (in the r_delta-weighted least-squares sense) that keep the
/// vehicle inside its velocity/acceleration bounds over the horizon. The
/// prediction is the zero sequence exactly when holding the current command
/// violates no bound.
///
/// `x` is the vehicle state [p, v, a]; it must already satisfy the bounds
/// (small slack for accumulated roundoff), otherwise InvalidInput is thrown.
HumanPrediction predict_human(const VehicleDiscrete& vehicle, const Vec& x,
                              double u_prev, const ConstraintSpec& spec,
                              Index horizon, double r_delta,
                              const QpOptions& options = {});

} // namespace platoon_mpc
