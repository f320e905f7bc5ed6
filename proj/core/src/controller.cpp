#include "platoon_mpc/controller.hpp"

#include <algorithm>
#include <cmath>

namespace platoon_mpc {

Controller::Controller(PlatoonModel model, ControllerConfig config,
                       const PlatoonState& x0, Index k0)
    : model_(std::move(model)), config_(std::move(config)) {
  require(model_.m >= 1, "controller: need at least one vehicle");
  require(config_.horizon >= 1, "controller: horizon must be >= 1");
  require(std::abs(config_.reference.dt - model_.dt) <= 1e-12,
          "controller: reference sample time must match the model");
  require(x0.x.size() == 3 * model_.m, "controller: initial state dimension mismatch");
  config_.weights.validate();
  config_.constraints.validate();
  config_.reference.validate();

  pred_ = build_prediction(model_, config_.horizon);
  headways_.resize(static_cast<size_t>(model_.m));
  for (Index i = 0; i < model_.m; ++i)
    headways_[static_cast<size_t>(i)] = model_.vehicles[static_cast<size_t>(i)].headway;
  mask_.assign(static_cast<size_t>(model_.m), false);

  // The held command is unknown at start-up; the acceleration states are the
  // best available estimate of what the drivetrains are currently tracking.
  u_prev_ = x0.x.segment(2 * model_.m, model_.m);

  rebuild_penalties();
  ref_state_ = init_reference(model_.vehicles, headways_, x0, k0, config_.reference);
}

void Controller::rebuild_penalties() {
  q_stage_ = stage_penalty(config_.weights, headways_);
  p_terminal_ = terminal_cost(model_, config_.weights, headways_, config_.dare);
  penalties_dirty_ = false;
}

Index Controller::anchor_vehicle() const {
  for (Index i = 0; i < model_.m; ++i)
    if (mask_[static_cast<size_t>(i)]) return i;
  return -1;
}

Vec Controller::stack_references(Index k) const {
  const Index n_state = 3 * model_.m;
  Vec stack(n_state * config_.horizon);
  for (Index j = 1; j <= config_.horizon; ++j) {
    const ReferenceVector ref =
        reference_at(config_.reference, ref_state_, model_.vehicles, headways_, k + j);
    stack.segment((j - 1) * n_state, n_state) = ref.x_star;
  }
  return stack;
}

ControlStep Controller::step(const PlatoonState& x, Index k) {
  require(x.x.size() == 3 * model_.m, "controller: state dimension mismatch");
  if (penalties_dirty_) rebuild_penalties();

  // While a human drives, the reference is re-anchored on that vehicle every
  // step: the platoon is asked to ramp back toward the cruise velocity from
  // the human's current state rather than chase a reference that ran ahead.
  const Index anchor = anchor_vehicle();
  if (anchor >= 0)
    ref_state_ = reset_on_takeover(model_.vehicles, headways_, x, k, anchor,
                                   config_.reference);

  const Vec refs = stack_references(k);

  const bool any_human = anchor >= 0;
  ControlStep out;
  out.diag.predicted_next.setZero(3 * model_.m);

  Vec human_du; // empty unless assembled below
  if (any_human || config_.force_human_terms) {
    human_du = Vec::Zero(model_.m * config_.horizon);
    for (Index i = 0; i < model_.m; ++i) {
      if (!mask_[static_cast<size_t>(i)]) continue;
      const VehicleDiscrete vd =
          discretize_vehicle(model_.vehicles[static_cast<size_t>(i)], model_.dt);
      Vec xi(3);
      xi << x.p(i), x.v(i), x.a(i);
      const HumanPrediction hp =
          predict_human(vd, xi, u_prev_(i), config_.constraints, config_.horizon,
                        config_.weights.r, config_.qp);
      if (hp.status == QpStatus::optimal) {
        for (Index j = 0; j < config_.horizon; ++j)
          human_du(j * model_.m + i) = hp.delta_u_seq(j);
        out.diag.human_binding = out.diag.human_binding || hp.binding;
      } else {
        // No in-bounds continuation exists; assume the driver holds the
        // current command and let the hard constraints do the talking.
        out.diag.human_prediction_failed = true;
      }
    }
  }

  CondensedQp condensed = condense(pred_, x.x, u_prev_, refs, config_.weights,
                                   headways_, p_terminal_, mask_, human_du);
  StackedConstraints cons = build_constraints(config_.constraints, pred_, x.x,
                                              u_prev_, mask_, human_du);
  condensed.qp.c_mat = std::move(cons.c_mat);
  condensed.qp.c_vec = std::move(cons.c_vec);

  const QpSolution sol = solve_qp(condensed.qp, config_.qp, warm_);
  const Index n_ctrl = static_cast<Index>(condensed.controlled.size());

  out.delta_u = Vec::Zero(model_.m);
  out.diag.status = sol.status;
  out.diag.iterations = sol.iterations;
  out.diag.active_count = static_cast<Index>(sol.active_set.size());
  out.diag.objective = sol.objective;

  if (sol.status == QpStatus::optimal) {
    for (Index ci = 0; ci < n_ctrl; ++ci)
      out.delta_u(condensed.controlled[static_cast<size_t>(ci)]) = sol.z(ci);

    // Warm-start the next solve with the plan shifted by one stage.
    Vec shifted = Vec::Zero(sol.z.size());
    shifted.head((config_.horizon - 1) * n_ctrl) = sol.z.tail((config_.horizon - 1) * n_ctrl);
    warm_.z = std::move(shifted);
    warm_.active_set.clear();
  } else {
    // Feasibility is gone (or the solver gave up): brake every controlled
    // vehicle as hard as the acceleration bound allows without driving its
    // one-step velocity below the floor.
    out.diag.fallback = true;
    for (Index i : condensed.controlled) {
      const double brake =
          std::max(config_.constraints.a_min,
                   (config_.constraints.v_min - x.v(i)) / model_.dt);
      const double u_cmd = std::min(brake, config_.constraints.a_max);
      out.delta_u(i) = u_cmd - u_prev_(i);
    }
    warm_ = {};
  }

  // Predicted successor under the plan, including the human vehicles'
  // predicted first increments; the simulation diffs this against reality.
  Vec delta_pred = out.delta_u;
  if (human_du.size() > 0)
    for (Index i = 0; i < model_.m; ++i)
      if (mask_[static_cast<size_t>(i)]) delta_pred(i) += human_du(i);
  out.diag.predicted_next = model_.a_m * x.x + model_.b_m * (u_prev_ + delta_pred);

  out.u_command = u_prev_ + out.delta_u;
  return out;
}

void Controller::takeover(Index vehicle, Index k, const PlatoonState& x) {
  require(vehicle >= 0 && vehicle < model_.m, "takeover: vehicle index out of range");
  if (mask_[static_cast<size_t>(vehicle)])
    throw InvalidInput("takeover: vehicle is already human-controlled");
  mask_[static_cast<size_t>(vehicle)] = true;
  ref_state_ = reset_on_takeover(model_.vehicles, headways_, x, k, anchor_vehicle(),
                                 config_.reference);
  warm_ = {};
}

void Controller::release(Index vehicle, Index k, const PlatoonState& x) {
  require(vehicle >= 0 && vehicle < model_.m, "release: vehicle index out of range");
  if (!mask_[static_cast<size_t>(vehicle)])
    throw InvalidInput("release: vehicle is not human-controlled");
  mask_[static_cast<size_t>(vehicle)] = false;
  if (anchor_vehicle() < 0)
    ref_state_ = init_reference(model_.vehicles, headways_, x, k, config_.reference);
  warm_ = {};
}

void Controller::set_headway(Index vehicle, double headway) {
  require(vehicle >= 0 && vehicle < model_.m, "set_headway: vehicle index out of range");
  require(headway > 0.0, "set_headway: headway must be > 0");
  headways_[static_cast<size_t>(vehicle)] = headway;
  penalties_dirty_ = true;
  warm_ = {};
}

void Controller::observe_applied(const Vec& applied_u) {
  require(applied_u.size() == model_.m, "observe_applied: dimension mismatch");
  u_prev_ = applied_u;
}

} // namespace platoon_mpc
