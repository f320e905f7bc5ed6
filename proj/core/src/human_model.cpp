#include "platoon_mpc/human_model.hpp"

#include "platoon_mpc/costfn.hpp"

namespace platoon_mpc {

HumanPrediction predict_human(const VehicleDiscrete& vehicle, const Vec& x,
                              double u_prev, const ConstraintSpec& spec,
                              Index horizon, double r_delta,
                              const QpOptions& options) {
  spec.validate();
  require(x.size() == 3, "predict_human: state must be [p, v, a]");
  require(horizon >= 1, "predict_human: horizon must be >= 1");
  require(r_delta > 0.0, "predict_human: r_delta must be > 0");

  constexpr double slack = 1e-6; // tolerate accumulated simulation roundoff
  if (x(1) < spec.v_min - slack || x(1) > spec.v_max + slack)
    throw InvalidInput("predict_human: current velocity outside bounds");
  if (x(2) < spec.a_min - slack || x(2) > spec.a_max + slack)
    throw InvalidInput("predict_human: current acceleration outside bounds");

  const PredictionMatrices pred = build_human_prediction(vehicle, horizon);

  Mat g_stage;
  Vec g_rhs;
  stage_state_rows(spec, 1, g_stage, g_rhs); // 4 rows: v/a box bounds
  const Index rows = g_stage.rows();

  const Vec free = pred.phi * x + pred.lambda * Vec::Constant(1, u_prev);

  QpProblem qp;
  qp.hessian = 2.0 * r_delta * Mat::Identity(horizon, horizon);
  qp.linear = Vec::Zero(horizon);
  qp.c_mat.setZero(rows * horizon, horizon);
  qp.c_vec.setZero(rows * horizon);
  for (Index j = 0; j < horizon; ++j) {
    qp.c_mat.middleRows(j * rows, rows).noalias() =
        g_stage * pred.gamma.middleRows(j * 3, 3);
    qp.c_vec.segment(j * rows, rows) = -g_rhs - g_stage * free.segment(j * 3, 3);
  }

  const QpSolution sol = solve_qp(qp, options);

  HumanPrediction out;
  out.delta_u_seq = sol.z;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.binding = !sol.active_set.empty();
  return out;
}

} // namespace platoon_mpc
