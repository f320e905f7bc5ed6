#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace platoon_mpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Eigen::Index;

/// Raised when a configuration value is out of its documented domain
/// (non-positive lag, empty platoon, bad horizon, ...).
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when a runtime input (state, scenario file, event list) is
/// structurally valid C++ but violates a documented precondition.
struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative numerical routine fails to converge or a
/// factorization breaks down.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Static description of one vehicle in the platoon.
///
/// `headway` is the initial constant-time-headway; it may be changed at
/// runtime through controller/simulation events, so consumers that need the
/// live value must track it separately.
struct VehicleParams {
  double tau = 0.5;        ///< drivetrain lag time constant [s], > 0
  double length = 4.0;     ///< vehicle length [m], >= 0
  double standstill = 2.0; ///< desired standstill clearance to predecessor [m], >= 0
  double headway = 1.0;    ///< constant time headway [s], > 0
};

/// Box bounds applied to every vehicle plus pairwise distance bounds.
struct ConstraintSpec {
  double d_min = 2.0;    ///< minimum front-to-front distance [m]
  double d_max = 130.0;  ///< maximum front-to-front distance [m]
  double v_min = 0.0;    ///< minimum velocity [m/s]
  double v_max = 30.0;   ///< maximum velocity [m/s]
  double a_min = -6.0;   ///< minimum acceleration [m/s^2]
  double a_max = 3.0;    ///< maximum acceleration [m/s^2]

  void validate() const {
    if (!(d_min < d_max)) throw InvalidParameter("constraints: require d_min < d_max");
    if (!(v_min < v_max)) throw InvalidParameter("constraints: require v_min < v_max");
    if (!(a_min < a_max)) throw InvalidParameter("constraints: require a_min < a_max");
    if (!(a_min < 0.0 && a_max > 0.0))
      throw InvalidParameter("constraints: acceleration bounds must straddle zero");
  }
};

/// Quadratic cost weights. q1 weighs spacing (relative-position) errors,
/// q2/q3/q4 absolute position/velocity/acceleration errors, r the
/// change-in-control effort.
struct CostWeights {
  double q1 = 1.0;
  double q2 = 1.0;
  double q3 = 1.0;
  double q4 = 1.0;
  double r = 1.0;

  void validate() const {
    if (q1 < 0 || q2 < 0 || q3 < 0 || q4 < 0)
      throw InvalidParameter("weights: q1..q4 must be >= 0");
    if (!(r > 0)) throw InvalidParameter("weights: r must be > 0");
  }
};

/// Stacked platoon state [p_1..p_M, v_1..v_M, a_1..a_M].
struct PlatoonState {
  Vec x; ///< size 3M

  Index size() const { return x.size() / 3; }
  double p(Index i) const { return x(i); }
  double v(Index i) const { return x(size() + i); }
  double a(Index i) const { return x(2 * size() + i); }
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidParameter(msg);
}

} // namespace platoon_mpc
