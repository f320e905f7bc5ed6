#include "platoon_mpc/reference.hpp"

#include <algorithm>
#include <cmath>

namespace platoon_mpc {

namespace {

void check_platoon_inputs(std::span<const VehicleParams> vehicles,
                          std::span<const double> headways) {
  require(!vehicles.empty(), "reference: need at least one vehicle");
  require(headways.size() == vehicles.size(),
          "reference: one headway per vehicle required");
  for (double h : headways) require(h > 0.0, "reference: headways must be > 0");
}

} // namespace

double constant_distance(std::span<const VehicleParams> vehicles, Index i) {
  require(i >= 0 && static_cast<size_t>(i) < vehicles.size(),
          "constant_distance: vehicle index out of range");
  const size_t pred = i == 0 ? 0 : static_cast<size_t>(i - 1);
  return vehicles[pred].length + vehicles[static_cast<size_t>(i)].standstill;
}

ReferenceState init_reference(std::span<const VehicleParams> vehicles,
                              std::span<const double> headways,
                              const PlatoonState& state, Index k,
                              const ReferenceConfig& config) {
  config.validate();
  check_platoon_inputs(vehicles, headways);
  require(state.x.size() == 3 * static_cast<Index>(vehicles.size()),
          "init_reference: state dimension mismatch");

  ReferenceState ref;
  ref.k0 = k;
  double v_min = state.v(0);
  for (Index i = 1; i < state.size(); ++i) v_min = std::min(v_min, state.v(i));
  ref.v_bar = std::max(0.0, v_min);
  ref.p_bar = state.p(0) + constant_distance(vehicles, 0) + headways[0] * ref.v_bar;
  return ref;
}

ReferenceState reset_on_takeover(std::span<const VehicleParams> vehicles,
                                 std::span<const double> headways,
                                 const PlatoonState& state, Index k,
                                 Index human, const ReferenceConfig& config) {
  config.validate();
  check_platoon_inputs(vehicles, headways);
  require(state.x.size() == 3 * static_cast<Index>(vehicles.size()),
          "reset_on_takeover: state dimension mismatch");
  require(human >= 0 && human < state.size(),
          "reset_on_takeover: vehicle index out of range");

  ReferenceState ref;
  ref.k0 = k;
  ref.v_bar = std::max(0.0, state.v(human));
  double offset = 0.0;
  for (Index j = 0; j <= human; ++j)
    offset += constant_distance(vehicles, j) + headways[static_cast<size_t>(j)] * ref.v_bar;
  ref.p_bar = state.p(human) + offset;
  return ref;
}

LeaderSample leader_reference(const ReferenceConfig& config,
                              const ReferenceState& state, Index k) {
  config.validate();
  require(k >= state.k0, "leader_reference: sample precedes the ramp start");

  const Index elapsed = k - state.k0;
  const double ramp_rate = (config.v_d - state.v_bar) / (config.dt * static_cast<double>(config.k_m));

  LeaderSample s;
  if (elapsed < config.k_m) {
    const double t = config.dt * static_cast<double>(elapsed);
    s.a_star = ramp_rate;
    s.v_star = state.v_bar + ramp_rate * t;
    s.p_star = state.p_bar + state.v_bar * t + 0.5 * ramp_rate * t * t;
  } else {
    // Hold v_d; the linear position piece starts exactly where the
    // quadratic ramp piece ends so the position reference is continuous.
    const double t_ramp = config.dt * static_cast<double>(config.k_m);
    const double p_ramp_end = state.p_bar + 0.5 * (state.v_bar + config.v_d) * t_ramp;
    s.a_star = 0.0;
    s.v_star = config.v_d;
    s.p_star = p_ramp_end + config.v_d * config.dt * static_cast<double>(elapsed - config.k_m);
  }
  return s;
}

ReferenceVector reference_at(const ReferenceConfig& config,
                             const ReferenceState& state,
                             std::span<const VehicleParams> vehicles,
                             std::span<const double> headways, Index k) {
  check_platoon_inputs(vehicles, headways);
  const LeaderSample lead = leader_reference(config, state, k);
  const Index m = static_cast<Index>(vehicles.size());

  ReferenceVector ref;
  ref.x_star.setZero(3 * m);
  double offset = 0.0;
  for (Index i = 0; i < m; ++i) {
    offset += constant_distance(vehicles, i) + headways[static_cast<size_t>(i)] * lead.v_star;
    ref.x_star(i) = lead.p_star - offset;
    ref.x_star(m + i) = lead.v_star;
    ref.x_star(2 * m + i) = lead.a_star;
  }
  return ref;
}

} // namespace platoon_mpc
