#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "platoon_mpc/dynamics.hpp"
#include "platoon_mpc/qp.hpp"

namespace platoon_mpc {

/// Dense matrix exponential (reference path for validation, independent of
/// the closed forms used elsewhere).
Mat matrix_exponential(const Mat& a);

/// Zero-order-hold discretization computed through the matrix exponential of
/// the augmented continuous-time system.
VehicleDiscrete discretize_by_expm(double tau, double dt);

/// Globally optimal point of a small strictly convex inequality QP, found by
/// enumerating every constraint subset as a candidate active set and keeping
/// the best KKT-consistent feasible candidate. Exponential in the row count;
/// intended for problems with at most ~16 rows.
struct EnumeratedQp {
  bool feasible = false; ///< some candidate satisfied all constraints
  Vec z;
  double objective = 0.0;
};
EnumeratedQp solve_qp_by_enumeration(const QpProblem& problem, double tol_feas = 1e-9);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail; ///< worst-case error or failure description
};

/// Reduced-size self-check suites: discretization closed forms vs the matrix
/// exponential, stage-cost sum/matrix equivalence, the active-set solver vs
/// the enumeration oracle, and the Riccati fixed point vs its scalar
/// closed form. `inject_fault` deliberately corrupts one comparison so the
/// reporting path can be demonstrated.
std::vector<CheckResult> validate_all(std::uint64_t seed, bool inject_fault = false);

} // namespace platoon_mpc
