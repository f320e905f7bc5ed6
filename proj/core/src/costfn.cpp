#include "platoon_mpc/costfn.hpp"

#include <cmath>

namespace platoon_mpc {

namespace {

void check_headways(std::span<const double> headways) {
  require(!headways.empty(), "costfn: need at least one headway");
  for (double h : headways) require(h > 0.0, "costfn: headways must be > 0");
}

/// phi*x + lambda*u_prev (+ gamma*human increments), the predicted trajectory
/// under zero controlled increments.
Vec free_response(const PredictionMatrices& pred, const Vec& x, const Vec& u_prev,
                  const Vec& human_delta_u) {
  Vec free = pred.phi * x + pred.lambda * u_prev;
  if (human_delta_u.size() > 0) free += pred.gamma * human_delta_u;
  return free;
}

/// Zero out decision entries of controlled vehicles so only the
/// human-predicted increments shift the free response.
Vec masked_human_increments(const Vec& human_delta_u, const std::vector<bool>& mask,
                            Index m, Index horizon) {
  if (human_delta_u.size() == 0) return human_delta_u;
  require(human_delta_u.size() == m * horizon,
          "costfn: human increment stack dimension mismatch");
  Vec out = human_delta_u;
  for (Index j = 0; j < horizon; ++j)
    for (Index i = 0; i < m; ++i)
      if (!mask[static_cast<size_t>(i)]) out(j * m + i) = 0.0;
  return out;
}

std::vector<Index> controlled_indices(const std::vector<bool>& mask, Index m) {
  require(static_cast<Index>(mask.size()) == m, "costfn: mask size mismatch");
  std::vector<Index> out;
  for (Index i = 0; i < m; ++i)
    if (!mask[static_cast<size_t>(i)]) out.push_back(i);
  if (out.empty())
    throw InvalidInput("costfn: every vehicle is human-controlled, decision is empty");
  return out;
}

/// Columns of gamma belonging to controlled vehicles, stage-major.
Mat reduced_gamma(const PredictionMatrices& pred, const std::vector<Index>& controlled,
                  Index m) {
  const Index n_ctrl = static_cast<Index>(controlled.size());
  Mat out(pred.gamma.rows(), n_ctrl * pred.horizon);
  for (Index j = 0; j < pred.horizon; ++j)
    for (Index ci = 0; ci < n_ctrl; ++ci)
      out.col(j * n_ctrl + ci) = pred.gamma.col(j * m + controlled[static_cast<size_t>(ci)]);
  return out;
}

} // namespace

Mat stage_penalty(const CostWeights& weights, std::span<const double> headways) {
  weights.validate();
  check_headways(headways);
  const Index m = static_cast<Index>(headways.size());

  Mat t = Mat::Zero(m, m);       // spacing coupling: 2 on the diagonal, -1 off it
  Mat t_h = Mat::Zero(m, m);     // headway-weighted coupling
  for (Index i = 0; i < m; ++i) {
    t(i, i) = 2.0;
    t_h(i, i) = headways[static_cast<size_t>(i)];
    if (i + 1 < m) {
      t(i, i + 1) = -1.0;
      t(i + 1, i) = -1.0;
      t_h(i, i + 1) = -headways[static_cast<size_t>(i + 1)];
    }
  }

  Mat q = Mat::Zero(3 * m, 3 * m);
  q.block(0, 0, m, m) = weights.q1 * t + weights.q2 * Mat::Identity(m, m);
  q.block(0, m, m, m) = weights.q1 * t_h;
  q.block(m, 0, m, m) = weights.q1 * t_h.transpose();
  for (Index i = 0; i < m; ++i) {
    const double h = headways[static_cast<size_t>(i)];
    q(m + i, m + i) = weights.q1 * h * h + weights.q3;
    q(2 * m + i, 2 * m + i) = weights.q4;
  }
  return q;
}

double cost_sum_form(std::span<const Vec> errors, const Vec& delta_u_stack,
                     const CostWeights& weights, std::span<const double> headways,
                     const Mat& p_terminal) {
  weights.validate();
  check_headways(headways);
  const Index m = static_cast<Index>(headways.size());
  require(errors.size() >= 2, "cost_sum_form: need at least two stages");
  const Index horizon = static_cast<Index>(errors.size()) - 1;
  require(delta_u_stack.size() == m * horizon,
          "cost_sum_form: control stack dimension mismatch");
  for (const Vec& e : errors)
    require(e.size() == 3 * m, "cost_sum_form: error vector dimension mismatch");
  require(p_terminal.rows() == 3 * m && p_terminal.cols() == 3 * m,
          "cost_sum_form: terminal penalty dimension mismatch");

  double cost = 0.0;
  for (Index j = 0; j < horizon; ++j) {
    const Vec& e = errors[static_cast<size_t>(j)];
    // Spacing errors over the M+1 consecutive pairs; the virtual vehicles at
    // both ends of the platoon carry zero error.
    for (Index i = 0; i <= m; ++i) {
      const double xi_i = i < m ? e(i) : 0.0;
      const double xi_prev = i > 0 ? e(i - 1) : 0.0;
      const double zeta_i = i < m ? e(m + i) : 0.0;
      const double h_i = i < m ? headways[static_cast<size_t>(i)] : 0.0;
      const double eta = xi_i - xi_prev + h_i * zeta_i;
      cost += weights.q1 * eta * eta;
    }
    for (Index i = 0; i < m; ++i) {
      cost += weights.q2 * e(i) * e(i);
      cost += weights.q3 * e(m + i) * e(m + i);
      cost += weights.q4 * e(2 * m + i) * e(2 * m + i);
      const double du = delta_u_stack(j * m + i);
      cost += weights.r * du * du;
    }
  }
  const Vec& e_n = errors[static_cast<size_t>(horizon)];
  cost += e_n.dot(p_terminal * e_n);
  return cost;
}

void stage_state_rows(const ConstraintSpec& spec, Index m, Mat& g_mat, Vec& g_vec) {
  spec.validate();
  require(m >= 1, "stage_state_rows: need at least one vehicle");
  const Index rows = 6 * m - 2;
  g_mat.setZero(rows, 3 * m);
  g_vec.setZero(rows);

  Index r = 0;
  // Distance rows for consecutive pairs: p_i - p_{i+1} within [d_min, d_max].
  for (Index i = 0; i + 1 < m; ++i, ++r) {
    g_mat(r, i) = -1.0;
    g_mat(r, i + 1) = 1.0;
    g_vec(r) = spec.d_min;
  }
  for (Index i = 0; i + 1 < m; ++i, ++r) {
    g_mat(r, i) = 1.0;
    g_mat(r, i + 1) = -1.0;
    g_vec(r) = -spec.d_max;
  }
  for (Index i = 0; i < m; ++i, ++r) {
    g_mat(r, m + i) = -1.0;
    g_vec(r) = spec.v_min;
  }
  for (Index i = 0; i < m; ++i, ++r) {
    g_mat(r, m + i) = 1.0;
    g_vec(r) = -spec.v_max;
  }
  for (Index i = 0; i < m; ++i, ++r) {
    g_mat(r, 2 * m + i) = -1.0;
    g_vec(r) = spec.a_min;
  }
  for (Index i = 0; i < m; ++i, ++r) {
    g_mat(r, 2 * m + i) = 1.0;
    g_vec(r) = -spec.a_max;
  }
}

CondensedQp condense(const PredictionMatrices& pred, const Vec& x,
                     const Vec& u_prev, const Vec& ref_stack,
                     const CostWeights& weights, std::span<const double> headways,
                     const Mat& p_terminal, const std::vector<bool>& human_mask,
                     const Vec& human_delta_u) {
  weights.validate();
  check_headways(headways);
  const Index m = static_cast<Index>(headways.size());
  const Index n_state = 3 * m;
  const Index horizon = pred.horizon;
  require(x.size() == n_state, "condense: state dimension mismatch");
  require(u_prev.size() == m, "condense: held-control dimension mismatch");
  require(ref_stack.size() == n_state * horizon,
          "condense: reference stack dimension mismatch");
  require(p_terminal.rows() == n_state && p_terminal.cols() == n_state,
          "condense: terminal penalty dimension mismatch");

  CondensedQp out;
  out.controlled = controlled_indices(human_mask, m);
  const Index n_ctrl = static_cast<Index>(out.controlled.size());
  const Index n_dec = n_ctrl * horizon;

  const Vec human = masked_human_increments(human_delta_u, human_mask, m, horizon);
  const Vec rho = free_response(pred, x, u_prev, human) - ref_stack;
  const Mat gamma_c = reduced_gamma(pred, out.controlled, m);
  const Mat q_stage = stage_penalty(weights, headways);

  Mat hessian = Mat::Zero(n_dec, n_dec);
  Vec linear = Vec::Zero(n_dec);
  for (Index j = 0; j < horizon; ++j) {
    const Mat& w_j = (j + 1 < horizon) ? q_stage : p_terminal;
    const auto g_j = gamma_c.middleRows(j * n_state, n_state);
    const Mat wg = w_j * g_j;
    hessian.noalias() += 2.0 * g_j.transpose() * wg;
    linear.noalias() += 2.0 * wg.transpose() * rho.segment(j * n_state, n_state);
  }
  hessian.diagonal().array() += 2.0 * weights.r;
  hessian = 0.5 * (hessian + hessian.transpose()).eval();

  out.qp.hessian = std::move(hessian);
  out.qp.linear = std::move(linear);
  out.qp.c_mat.resize(0, n_dec);
  out.qp.c_vec.resize(0);
  return out;
}

StackedConstraints build_constraints(const ConstraintSpec& spec,
                                     const PredictionMatrices& pred, const Vec& x,
                                     const Vec& u_prev,
                                     const std::vector<bool>& human_mask,
                                     const Vec& human_delta_u) {
  const Index n_state = x.size();
  const Index m = n_state / 3;
  require(n_state == 3 * m && m >= 1, "build_constraints: bad state dimension");
  require(u_prev.size() == m, "build_constraints: held-control dimension mismatch");
  const Index horizon = pred.horizon;

  const std::vector<Index> controlled = controlled_indices(human_mask, m);
  const Index n_dec = static_cast<Index>(controlled.size()) * horizon;

  const Vec human = masked_human_increments(human_delta_u, human_mask, m, horizon);
  const Vec free = free_response(pred, x, u_prev, human);
  const Mat gamma_c = reduced_gamma(pred, controlled, m);

  Mat g_stage;
  Vec g_rhs;
  stage_state_rows(spec, m, g_stage, g_rhs);
  const Index rows_per_stage = g_stage.rows();

  StackedConstraints out;
  out.c_mat.setZero(rows_per_stage * horizon, n_dec);
  out.c_vec.setZero(rows_per_stage * horizon);
  for (Index j = 0; j < horizon; ++j) {
    const auto g_j = gamma_c.middleRows(j * n_state, n_state);
    out.c_mat.middleRows(j * rows_per_stage, rows_per_stage).noalias() = g_stage * g_j;
    out.c_vec.segment(j * rows_per_stage, rows_per_stage) =
        -g_rhs - g_stage * free.segment(j * n_state, n_state);
  }
  return out;
}

Mat terminal_cost(const PlatoonModel& model, const CostWeights& weights,
                  std::span<const double> headways, const DareOptions& options) {
  weights.validate();
  require(static_cast<Index>(headways.size()) == model.m,
          "terminal_cost: one headway per vehicle required");
  const Mat q = stage_penalty(weights, headways);
  const Mat r = weights.r * Mat::Identity(model.m, model.m);
  return solve_dare(model.a_m, model.b_m, q, r, options).p;
}

} // namespace platoon_mpc
