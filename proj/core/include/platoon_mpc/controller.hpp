#pragma once

#include <span>
#include <vector>

#include "platoon_mpc/costfn.hpp"
#include "platoon_mpc/dynamics.hpp"
#include "platoon_mpc/human_model.hpp"
#include "platoon_mpc/qp.hpp"
#include "platoon_mpc/reference.hpp"
#include "platoon_mpc/types.hpp"

namespace platoon_mpc {

struct ControllerConfig {
  CostWeights weights;
  ConstraintSpec constraints;
  Index horizon = 10;
  ReferenceConfig reference;
  QpOptions qp;
  DareOptions dare;
  /// Assemble the human-prediction terms even when no vehicle is
  /// human-controlled (they are then identically zero). Exists so tests can
  /// verify the structurally reduced no-human path against the full path.
  bool force_human_terms = false;
};

struct StepDiagnostics {
  QpStatus status = QpStatus::optimal;
  int iterations = 0;
  Index active_count = 0;   ///< active inequality rows at the optimum
  bool fallback = false;    ///< braking fallback engaged (QP not solved to optimality)
  double objective = 0.0;
  Vec predicted_next;       ///< model-predicted successor state (3M)
  bool human_binding = false;        ///< any human prediction had binding bounds
  bool human_prediction_failed = false; ///< a human subproblem was not optimal; zero increments assumed
};

struct ControlStep {
  Vec delta_u;   ///< per-vehicle control increment (zero at human entries)
  Vec u_command; ///< held control plus increment
  StepDiagnostics diag;
};

/// Centralized model-predictive platoon controller with per-vehicle constant
/// time headways, temporary human takeover of individual vehicles, and hard
/// state constraints.
///
/// The controller owns the live headway values, the human/platoon switch
/// mask, the reference anchor and the held control vector. The simulation
/// loop drives it with `step`, reports realized controls back through
/// `observe_applied`, and forwards events to `takeover`/`release`/
/// `set_headway`.
class Controller {
 public:
  Controller(PlatoonModel model, ControllerConfig config, const PlatoonState& x0,
             Index k0 = 0);

  /// Plan one step at sample k for measured state x.
  ControlStep step(const PlatoonState& x, Index k);

  /// Mark a vehicle human-controlled and re-anchor the reference on it.
  void takeover(Index vehicle, Index k, const PlatoonState& x);

  /// Return a vehicle to platoon control; when no human remains the
  /// reference is re-initialized from the platoon's slowest vehicle.
  void release(Index vehicle, Index k, const PlatoonState& x);

  /// Change a vehicle's constant time headway; penalties, terminal cost and
  /// references pick the new value up at the next step.
  void set_headway(Index vehicle, double headway);

  /// Report the control vector that was actually applied to the plant
  /// (differs from u_command at human-driven vehicles).
  void observe_applied(const Vec& applied_u);

  const std::vector<bool>& human_mask() const { return mask_; }
  std::span<const double> headways() const { return headways_; }
  const ReferenceState& reference_state() const { return ref_state_; }
  const Vec& held_control() const { return u_prev_; }
  const PlatoonModel& model() const { return model_; }
  const Mat& terminal_penalty() const { return p_terminal_; }

 private:
  void rebuild_penalties();
  Vec stack_references(Index k) const;
  Index anchor_vehicle() const; ///< lowest-index human-controlled vehicle

  PlatoonModel model_;
  ControllerConfig config_;
  PredictionMatrices pred_;
  std::vector<double> headways_;
  std::vector<bool> mask_;
  ReferenceState ref_state_;
  Vec u_prev_;
  Mat q_stage_;
  Mat p_terminal_;
  bool penalties_dirty_ = false;
  QpWarmStart warm_;
};

} // namespace platoon_mpc
