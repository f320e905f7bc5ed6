#pragma once

#include <span>
#include <vector>

#include "platoon_mpc/dynamics.hpp"
#include "platoon_mpc/qp.hpp"
#include "platoon_mpc/types.hpp"

namespace platoon_mpc {

/// Per-stage state penalty for the stacked error [xi; zeta; psi]
/// (position/velocity/acceleration errors). Couples neighboring vehicles
/// through the spacing-error expansion; block structure:
///   [ q1*T + q2*I   q1*T_h        0    ]
///   [ q1*T_h'       q1*H + q3*I   0    ]
///   [ 0             0             q4*I ]
/// with T the tridiagonal spacing coupling, T_h its headway-weighted
/// counterpart and H = diag(h_i^2).
Mat stage_penalty(const CostWeights& weights, std::span<const double> headways);

/// Literal stage-by-stage evaluation of the tracking cost:
/// for each stage j = 0..N-1 the spacing errors of all M+1 vehicle pairs
/// (virtual boundary vehicles contribute zero error), the absolute errors of
/// all vehicles and the control-increment penalty; plus the terminal
/// quadratic form. `errors` holds N+1 stacked error vectors (stages 0..N);
/// `delta_u_stack` holds N stage-major control-increment blocks of size M.
double cost_sum_form(std::span<const Vec> errors, const Vec& delta_u_stack,
                     const CostWeights& weights, std::span<const double> headways,
                     const Mat& p_terminal);

/// Per-stage state constraint rows G x + g <= 0, ordered
/// [d_min; d_max; v_min; v_max; a_min; a_max]: 6M-2 rows (no distance rows
/// for a single vehicle).
void stage_state_rows(const ConstraintSpec& spec, Index m, Mat& g_mat, Vec& g_vec);

/// Condensed strictly convex QP over the stacked control increments of the
/// platoon-controlled vehicles (human-controlled vehicles' decision columns
/// are removed, their predicted increments enter the free response).
struct CondensedQp {
  QpProblem qp;                  ///< hessian + linear term (constraints added separately)
  std::vector<Index> controlled; ///< ascending vehicle indices forming each decision block
};

/// Build the condensed cost. `ref_stack` stacks the references for stages
/// k+1..k+N; `human_delta_u` is a stage-major M*N vector of predicted
/// human control increments (entries of controlled vehicles are ignored) or
/// empty when no vehicle is human-controlled. Throws InvalidInput when every
/// vehicle is human-controlled (empty decision).
CondensedQp condense(const PredictionMatrices& pred, const Vec& x,
                     const Vec& u_prev, const Vec& ref_stack,
                     const CostWeights& weights, std::span<const double> headways,
                     const Mat& p_terminal, const std::vector<bool>& human_mask,
                     const Vec& human_delta_u);

/// Stacked inequality rows over the horizon for the same decision variables
/// as `condense`.
struct StackedConstraints {
  Mat c_mat;
  Vec c_vec;
};
StackedConstraints build_constraints(const ConstraintSpec& spec,
                                     const PredictionMatrices& pred, const Vec& x,
                                     const Vec& u_prev,
                                     const std::vector<bool>& human_mask,
                                     const Vec& human_delta_u);

/// Terminal penalty: Riccati fixed point of the platoon model under the
/// current stage penalty and control-increment weight.
Mat terminal_cost(const PlatoonModel& model, const CostWeights& weights,
                  std::span<const double> headways, const DareOptions& options = {});

} // namespace platoon_mpc
