#include "platoon_mpc/dynamics.hpp"

#include <cmath>

namespace platoon_mpc {

VehicleDiscrete discretize_vehicle(const VehicleParams& vehicle, double dt) {
  require(vehicle.tau > 0.0, "discretize_vehicle: tau must be > 0");
  require(dt > 0.0, "discretize_vehicle: dt must be > 0");

  const double tau = vehicle.tau;
  // 1 - exp(-dt/tau) via expm1 to stay accurate for dt << tau.
  const double decay = std::exp(-dt / tau);
  const double rise = -std::expm1(-dt / tau);
  const double lag_pos = tau * (dt - tau * rise); // position response to held acceleration state

  VehicleDiscrete d;
  d.dt = dt;
  d.a.setZero(3, 3);
  d.a(0, 0) = 1.0;
  d.a(0, 1) = dt;
  d.a(0, 2) = lag_pos;
  d.a(1, 1) = 1.0;
  d.a(1, 2) = tau * rise;
  d.a(2, 2) = decay;

  d.b.setZero(3);
  d.b(0) = -lag_pos + 0.5 * dt * dt;
  d.b(1) = dt - tau * rise;
  d.b(2) = rise;
  return d;
}

PlatoonModel build_platoon_model(std::span<const VehicleParams> vehicles, double dt) {
  require(!vehicles.empty(), "build_platoon_model: need at least one vehicle");
  const Index m = static_cast<Index>(vehicles.size());

  PlatoonModel model;
  model.m = m;
  model.dt = dt;
  model.vehicles.assign(vehicles.begin(), vehicles.end());
  model.a_m.setZero(3 * m, 3 * m);
  model.b_m.setZero(3 * m, m);

  for (Index i = 0; i < m; ++i) {
    const VehicleDiscrete d = discretize_vehicle(vehicles[static_cast<size_t>(i)], dt);
    for (Index r = 0; r < 3; ++r) {
      for (Index c = 0; c < 3; ++c) {
        if (d.a(r, c) != 0.0) model.a_m(r * m + i, c * m + i) = d.a(r, c);
      }
      model.b_m(r * m + i, i) = d.b(r);
    }
  }
  return model;
}

namespace {

// Shared stacking for any (A, B) pair: block row j of phi is A^(j+1); the
// (j, i) block of gamma (i <= j) is (A^(j-i) + ... + A + I) B, which is also
// block j of lambda when i = 0.
PredictionMatrices stack_prediction(const Mat& a, const Mat& b, Index horizon) {
  require(horizon >= 1, "build_prediction: horizon must be >= 1");
  const Index s = a.rows();
  const Index in = b.cols();

  PredictionMatrices pm;
  pm.horizon = horizon;
  pm.phi.setZero(s * horizon, s);
  pm.lambda.setZero(s * horizon, in);
  pm.gamma.setZero(s * horizon, in * horizon);

  Mat a_pow = a;               // A^(j+1) while filling block row j
  std::vector<Mat> cum(static_cast<size_t>(horizon)); // cum[m] = (A^m + ... + I) B
  cum[0] = b;
  for (Index j = 1; j < horizon; ++j)
    cum[static_cast<size_t>(j)] = a * cum[static_cast<size_t>(j - 1)] + b;

  for (Index j = 0; j < horizon; ++j) {
    pm.phi.middleRows(j * s, s) = a_pow;
    if (j + 1 < horizon) a_pow = a_pow * a;
    pm.lambda.middleRows(j * s, s) = cum[static_cast<size_t>(j)];
    for (Index i = 0; i <= j; ++i)
      pm.gamma.block(j * s, i * in, s, in) = cum[static_cast<size_t>(j - i)];
  }
  return pm;
}

} // namespace

PredictionMatrices build_prediction(const PlatoonModel& model, Index horizon) {
  return stack_prediction(model.a_m, model.b_m, horizon);
}

PredictionMatrices build_human_prediction(const VehicleDiscrete& vehicle, Index horizon) {
  return stack_prediction(vehicle.a, vehicle.b, horizon);
}

StepResult step_platoon(const PlatoonModel& model, const PlatoonState& state,
                        const Vec& u_prev, const Vec& delta_u,
                        const std::optional<Vec>& noise) {
  require(state.x.size() == 3 * model.m, "step_platoon: state dimension mismatch");
  require(u_prev.size() == model.m, "step_platoon: u_prev dimension mismatch");
  require(delta_u.size() == model.m, "step_platoon: delta_u dimension mismatch");

  StepResult r;
  r.applied_u = u_prev + delta_u;
  r.state.x = model.a_m * state.x + model.b_m * r.applied_u;
  if (noise) {
    require(noise->size() == 3 * model.m, "step_platoon: noise dimension mismatch");
    r.state.x += *noise;
  }
  return r;
}

} // namespace platoon_mpc
