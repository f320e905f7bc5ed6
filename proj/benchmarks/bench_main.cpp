// Microbenchmarks for the hot paths of the controller stack, sized like the
// shipped five-vehicle highway scenario (M = 5, horizon N = 20).

#include <benchmark/benchmark.h>

#include <vector>

#include "platoon_mpc/controller.hpp"
#include "platoon_mpc/costfn.hpp"
#include "platoon_mpc/dynamics.hpp"
#include "platoon_mpc/qp.hpp"
#include "platoon_mpc/reference.hpp"

namespace {

using namespace platoon_mpc;

constexpr double kDt = 0.5;
constexpr Index kHorizon = 20;

std::vector<VehicleParams> study_vehicles() {
  return {
      {0.5, 2.5, 6.0, 1.0},
      {0.2, 2.5, 6.0, 1.3},
      {0.3, 2.5, 5.0, 1.5},
      {0.6, 2.5, 8.0, 0.8},
      {0.4, 2.5, 7.0, 1.2},
  };
}

CostWeights study_weights() { return {1.0, 1.0, 1.0, 1.0, 2.0}; }

ConstraintSpec study_constraints() {
  ConstraintSpec c;
  c.d_min = 2.0;
  c.d_max = 130.0;
  c.v_min = 0.0;
  c.v_max = 27.8;
  c.a_min = -6.0;
  c.a_max = 3.0;
  return c;
}

ReferenceConfig study_reference() { return {27.78, 40, kDt}; }

PlatoonState resting_state(Index m) {
  PlatoonState x;
  x.x.setZero(3 * m);
  for (Index i = 0; i < m; ++i) x.x(i) = -12.0 * static_cast<double>(i);
  return x;
}

std::vector<double> headways_of(const std::vector<VehicleParams>& vehicles) {
  std::vector<double> h;
  for (const auto& v : vehicles) h.push_back(v.headway);
  return h;
}

/// Everything the per-step pipeline needs, built once.
struct StudyFixture {
  std::vector<VehicleParams> vehicles = study_vehicles();
  PlatoonModel model = build_platoon_model(vehicles, kDt);
  PredictionMatrices pred = build_prediction(model, kHorizon);
  std::vector<double> headways = headways_of(vehicles);
  CostWeights weights = study_weights();
  ConstraintSpec constraints = study_constraints();
  PlatoonState x0 = resting_state(model.m);
  Mat p_terminal = terminal_cost(model, weights, headways);
  Vec u_prev = Vec::Zero(model.m);
  std::vector<bool> mask = std::vector<bool>(static_cast<size_t>(model.m), false);
  Vec ref_stack;
  QpProblem qp;

  StudyFixture() {
    const ReferenceConfig ref_config = study_reference();
    const ReferenceState ref_state =
        init_reference(vehicles, headways, x0, 0, ref_config);
    ref_stack.resize(3 * model.m * kHorizon);
    for (Index j = 1; j <= kHorizon; ++j)
      ref_stack.segment((j - 1) * 3 * model.m, 3 * model.m) =
          reference_at(ref_config, ref_state, vehicles, headways, j).x_star;

    CondensedQp condensed = condense(pred, x0.x, u_prev, ref_stack, weights,
                                     headways, p_terminal, mask, Vec());
    StackedConstraints cons =
        build_constraints(constraints, pred, x0.x, u_prev, mask, Vec());
    qp = std::move(condensed.qp);
    qp.c_mat = std::move(cons.c_mat);
    qp.c_vec = std::move(cons.c_vec);
  }
};

const StudyFixture& fixture() {
  static const StudyFixture f;
  return f;
}

void BM_DiscretizeVehicle(benchmark::State& state) {
  for (auto _ : state) {
    const VehicleDiscrete vd = discretize_vehicle({0.5, 2.5, 6.0, 1.0}, kDt);
    benchmark::DoNotOptimize(vd.a(0, 2));
  }
}
BENCHMARK(BM_DiscretizeVehicle);

void BM_CondenseStudySize(benchmark::State& state) {
  const StudyFixture& f = fixture();
  for (auto _ : state) {
    CondensedQp condensed = condense(f.pred, f.x0.x, f.u_prev, f.ref_stack,
                                     f.weights, f.headways, f.p_terminal, f.mask,
                                     Vec());
    benchmark::DoNotOptimize(condensed.qp.hessian(0, 0));
  }
}
BENCHMARK(BM_CondenseStudySize);

void BM_BuildConstraintsStudySize(benchmark::State& state) {
  const StudyFixture& f = fixture();
  for (auto _ : state) {
    StackedConstraints cons =
        build_constraints(f.constraints, f.pred, f.x0.x, f.u_prev, f.mask, Vec());
    benchmark::DoNotOptimize(cons.c_vec(0));
  }
}
BENCHMARK(BM_BuildConstraintsStudySize);

void BM_QpSolveStudySizeCold(benchmark::State& state) {
  const StudyFixture& f = fixture();
  for (auto _ : state) {
    const QpSolution sol = solve_qp(f.qp);
    benchmark::DoNotOptimize(sol.iterations);
  }
}
BENCHMARK(BM_QpSolveStudySizeCold);

void BM_ControllerStepWarm(benchmark::State& state) {
  const StudyFixture& f = fixture();
  ControllerConfig config;
  config.weights = f.weights;
  config.constraints = f.constraints;
  config.horizon = kHorizon;
  config.reference = study_reference();
  Controller controller(f.model, config, f.x0, 0);
  for (auto _ : state) {
    const ControlStep cs = controller.step(f.x0, 0);
    benchmark::DoNotOptimize(cs.delta_u(0));
  }
}
BENCHMARK(BM_ControllerStepWarm);

void BM_TerminalCostStudySize(benchmark::State& state) {
  const StudyFixture& f = fixture();
  for (auto _ : state) {
    const Mat p = terminal_cost(f.model, f.weights, f.headways);
    benchmark::DoNotOptimize(p(0, 0));
  }
}
BENCHMARK(BM_TerminalCostStudySize);

} // namespace
