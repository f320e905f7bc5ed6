#pragma once

#include <span>

#include "platoon_mpc/types.hpp"

namespace platoon_mpc {

/// Parameters of the trapezoidal velocity reference: ramp to v_d over k_m
/// samples of length dt, then hold.
struct ReferenceConfig {
  double v_d = 0.0; ///< desired cruise velocity [m/s]
  Index k_m = 1;    ///< ramp duration in samples, >= 1
  double dt = 0.1;  ///< sample time [s]

  void validate() const {
    require(k_m >= 1, "reference: k_m must be >= 1");
    require(dt > 0.0, "reference: dt must be > 0");
    require(v_d >= 0.0, "reference: v_d must be >= 0");
  }
};

/// Anchor of the reference trajectory: ramp start sample k0, starting
/// velocity v_bar and virtual-leader starting position p_bar.
struct ReferenceState {
  Index k0 = 0;
  double v_bar = 0.0;
  double p_bar = 0.0;
};

/// Per-vehicle reference [p*_1..p*_M, v*..v*, a*..a*] at one sample.
struct ReferenceVector {
  Vec x_star;
};

/// Virtual-leader sample: piecewise-quadratic position, piecewise-linear
/// velocity, piecewise-constant acceleration; all continuous except the
/// single acceleration step at the ramp end.
struct LeaderSample {
  double p_star = 0.0;
  double v_star = 0.0;
  double a_star = 0.0;
};

/// Standstill spacing d_i between vehicle i and its predecessor: predecessor
/// length plus vehicle i's desired standstill clearance. Vehicle 0's
/// "predecessor" is the virtual leader, which is given vehicle 0's own length.
double constant_distance(std::span<const VehicleParams> vehicles, Index i);

/// Anchor the reference at sample k: ramp from the slowest vehicle's velocity
/// and place the virtual leader one desired distance ahead of vehicle 0.
ReferenceState init_reference(std::span<const VehicleParams> vehicles,
                              std::span<const double> headways,
                              const PlatoonState& state, Index k,
                              const ReferenceConfig& config);

/// Re-anchor the reference on vehicle `human` (0-based): ramp from that
/// vehicle's velocity, with the virtual leader placed so the vehicle's own
/// position reference passes through its current position.
ReferenceState reset_on_takeover(std::span<const VehicleParams> vehicles,
                                 std::span<const double> headways,
                                 const PlatoonState& state, Index k,
                                 Index human, const ReferenceConfig& config);

/// Virtual-leader reference at sample k >= state.k0 (throws InvalidParameter
/// otherwise).
LeaderSample leader_reference(const ReferenceConfig& config,
                              const ReferenceState& state, Index k);

/// Stacked per-vehicle reference at sample k: each vehicle trails the one
/// ahead by d_i + h_i * v*.
ReferenceVector reference_at(const ReferenceConfig& config,
                             const ReferenceState& state,
                             std::span<const VehicleParams> vehicles,
                             std::span<const double> headways, Index k);

} // namespace platoon_mpc
