#pragma once

// Shared helpers for the test suites: a deterministic RNG with explicit
// distributions (so expectations never depend on libstdc++ internals) and
// canned vehicle/scenario configurations used across suites.

#include <cstdint>
#include <random>
#include <vector>

#include "platoon_mpc/dynamics.hpp"
#include "platoon_mpc/sim.hpp"
#include "platoon_mpc/types.hpp"

namespace test_support {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  platoon_mpc::Index integer(platoon_mpc::Index lo, platoon_mpc::Index hi) {
    return lo + static_cast<platoon_mpc::Index>(
                    gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  platoon_mpc::Vec vector(platoon_mpc::Index n, double lo, double hi) {
    platoon_mpc::Vec v(n);
    for (platoon_mpc::Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  /// Random symmetric positive definite matrix with eigenvalues >= margin.
  platoon_mpc::Mat spd(platoon_mpc::Index n, double margin = 0.3) {
    platoon_mpc::Mat f(n, n);
    for (platoon_mpc::Index i = 0; i < n; ++i)
      for (platoon_mpc::Index j = 0; j < n; ++j) f(i, j) = uniform(-1.0, 1.0);
    platoon_mpc::Mat h = f.transpose() * f;
    h.diagonal().array() += margin + uniform(0.0, 1.0);
    return h;
  }

  /// Random symmetric positive semidefinite matrix.
  platoon_mpc::Mat psd(platoon_mpc::Index n) {
    platoon_mpc::Mat f(n, n);
    for (platoon_mpc::Index i = 0; i < n; ++i)
      for (platoon_mpc::Index j = 0; j < n; ++j) f(i, j) = uniform(-1.0, 1.0);
    return f.transpose() * f;
  }

 private:
  std::mt19937_64 gen_;
};

/// The five-vehicle highway configuration exercised by the shipped
/// `highway_study` scenario (heterogeneous lags, clearances and headways).
inline std::vector<platoon_mpc::VehicleParams> highway_vehicles() {
  return {
      {0.5, 2.5, 6.0, 1.0},
      {0.2, 2.5, 6.0, 1.3},
      {0.3, 2.5, 5.0, 1.5},
      {0.6, 2.5, 8.0, 0.8},
      {0.4, 2.5, 7.0, 1.2},
  };
}

inline platoon_mpc::ConstraintSpec highway_constraints() {
  platoon_mpc::ConstraintSpec c;
  c.d_min = 2.0;
  c.d_max = 130.0;
  c.v_min = 0.0;
  c.v_max = 27.8;
  c.a_min = -6.0;
  c.a_max = 3.0;
  return c;
}

/// Small homogeneous scenario that converges in a few seconds of simulated
/// time; suites that need a closed-loop run start from this.
inline platoon_mpc::Scenario small_scenario(platoon_mpc::Index m = 2) {
  platoon_mpc::Scenario s;
  s.name = "unit";
  for (platoon_mpc::Index i = 0; i < m; ++i)
    s.vehicles.push_back({0.4, 4.0, 5.0, 1.0});
  s.dt = 0.5;
  s.duration_s = 20.0;
  s.v_d = 15.0;
  s.k_m = 10;
  s.horizon = 8;
  s.weights = {1.0, 1.0, 1.0, 1.0, 2.0};
  s.constraints.d_min = 2.0;
  s.constraints.d_max = 200.0;
  s.constraints.v_min = 0.0;
  s.constraints.v_max = 20.0;
  s.constraints.a_min = -6.0;
  s.constraints.a_max = 3.0;
  return s;
}

inline std::vector<double> headways_of(
    const std::vector<platoon_mpc::VehicleParams>& vehicles) {
  std::vector<double> h;
  h.reserve(vehicles.size());
  for (const auto& v : vehicles) h.push_back(v.headway);
  return h;
}

/// True when no command sequence can keep the vehicle's velocity within
/// bounds over the horizon, proven without any QP machinery. Velocity at
/// every stage is strictly increasing in each applied command, and commands
/// map one-to-one onto next-stage accelerations, so the rollout that pins
/// the acceleration at a bound dominates every trajectory respecting that
/// bound. A v_min breach under the a_max-pinned rollout (or a v_max breach
/// under the a_min-pinned one) therefore certifies the constraint set is
/// empty — e.g. braking hard right at v_min can outrun the jerk the
/// actuator lag admits.
inline bool provably_infeasible_state(const platoon_mpc::VehicleDiscrete& vd,
                                      const platoon_mpc::Vec& x,
                                      const platoon_mpc::ConstraintSpec& spec,
                                      platoon_mpc::Index horizon) {
  const auto breaches = [&](double a_pin, double v_bound, double sign) {
    platoon_mpc::Vec xr = x;
    for (platoon_mpc::Index j = 0; j < horizon; ++j) {
      const double u = (a_pin - vd.a(2, 2) * xr(2)) / vd.b(2);
      xr = (vd.a * xr + vd.b * u).eval();
      if (sign * (xr(1) - v_bound) < -1e-10) return true;
    }
    return false;
  };
  return breaches(spec.a_max, spec.v_min, 1.0) ||
         breaches(spec.a_min, spec.v_max, -1.0);
}

} // namespace test_support
