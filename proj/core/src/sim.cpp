#include "platoon_mpc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "platoon_mpc/dynamics.hpp"
#include "platoon_mpc/log.hpp"

namespace platoon_mpc {

namespace {

constexpr double kHumanGain = 1.0; ///< proportional velocity-tracking gain [1/s]

bool is_sample_multiple(double time_s, double dt) {
  const double steps = time_s / dt;
  return std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, std::abs(steps));
}

Index sample_of(double time_s, double dt) {
  return static_cast<Index>(std::llround(time_s / dt));
}

/// Deterministic standard-normal sampler (Box-Muller over mt19937_64);
/// the C++ standard library's normal_distribution is implementation-defined,
/// which would break byte-identical runs across platforms.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform01() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Scripted human driver: proportional velocity tracking, clipped so the
/// exact one-step velocity update stays inside the bounds, then clipped to
/// the acceleration box.
double human_command(const VehicleDiscrete& vd, double v, double a,
                     double v_target, const ConstraintSpec& c) {
  const double u_des = kHumanGain * (v_target - v);
  const double lag_v = vd.a(1, 2); // velocity response to the held acceleration state
  const double gain_v = vd.b(1);   // velocity response to the command
  const double lo = (c.v_min - v - lag_v * a) / gain_v;
  const double hi = (c.v_max - v - lag_v * a) / gain_v;
  const double u = std::min(std::max(u_des, lo), hi);
  return std::min(std::max(u, c.a_min), c.a_max);
}

} // namespace

void Scenario::validate() const {
  if (vehicles.empty()) throw InvalidInput("scenario: 'vehicles' must be non-empty");
  const Index m = vehicle_count();
  for (size_t i = 0; i < vehicles.size(); ++i) {
    const VehicleParams& veh = vehicles[i];
    std::ostringstream tag;
    tag << "scenario: vehicles[" << i + 1 << "]";
    if (!(veh.tau > 0.0)) throw InvalidInput(tag.str() + ".tau must be > 0");
    if (!(veh.length >= 0.0)) throw InvalidInput(tag.str() + ".length must be >= 0");
    if (!(veh.standstill >= 0.0))
      throw InvalidInput(tag.str() + ".standstill must be >= 0");
    if (!(veh.headway > 0.0)) throw InvalidInput(tag.str() + ".headway must be > 0");
  }
  if (!(dt > 0.0)) throw InvalidInput("scenario: 'dt' must be > 0");
  if (!(duration_s >= 0.0)) throw InvalidInput("scenario: 'duration_s' must be >= 0");
  if (!is_sample_multiple(duration_s, dt))
    throw InvalidInput("scenario: 'duration_s' must be a multiple of dt");
  if (k_m < 1) throw InvalidInput("scenario: 'k_m' must be >= 1");
  if (horizon < 1) throw InvalidInput("scenario: 'horizon' must be >= 1");
  weights.validate();
  constraints.validate();
  if (v_d < constraints.v_min || v_d > constraints.v_max)
    throw InvalidInput("scenario: 'v_d' must lie within the velocity bounds");

  double prev_time = 0.0;
  std::vector<bool> human(static_cast<size_t>(m), false);
  for (size_t e = 0; e < events.size(); ++e) {
    const Event& ev = events[e];
    std::ostringstream tag;
    tag << "scenario: events[" << e << "]";
    if (ev.time < 0.0 || ev.time > duration_s)
      throw InvalidInput(tag.str() + ".time outside [0, duration_s]");
    if (!is_sample_multiple(ev.time, dt))
      throw InvalidInput(tag.str() + ".time must be a multiple of dt");
    if (ev.time < prev_time) throw InvalidInput(tag.str() + " not sorted by time");
    prev_time = ev.time;
    if (ev.vehicle < 0 || ev.vehicle >= m)
      throw InvalidInput(tag.str() + ".vehicle out of range");
    const size_t vi = static_cast<size_t>(ev.vehicle);
    switch (ev.kind) {
      case Event::Kind::takeover: {
        if (human[vi]) throw InvalidInput(tag.str() + ": vehicle already human-controlled");
        human[vi] = true;
        if (ev.profile.empty())
          throw InvalidInput(tag.str() + ".profile must be non-empty for takeover");
        double prev_profile = -1.0;
        for (const auto& [pt, pv] : ev.profile) {
          if (!is_sample_multiple(pt, dt))
            throw InvalidInput(tag.str() + ".profile times must be multiples of dt");
          if (pt <= prev_profile)
            throw InvalidInput(tag.str() + ".profile times must be strictly increasing");
          prev_profile = pt;
          if (pv < constraints.v_min || pv > constraints.v_max)
            throw InvalidInput(tag.str() + ".profile velocity outside bounds");
        }
        break;
      }
      case Event::Kind::release:
        if (!human[vi]) throw InvalidInput(tag.str() + ": vehicle is not human-controlled");
        human[vi] = false;
        break;
      case Event::Kind::set_headway:
        if (!(ev.headway > 0.0)) throw InvalidInput(tag.str() + ".headway must be > 0");
        break;
    }
  }

  auto check_override = [&](const std::optional<std::vector<double>>& v,
                            const char* field) {
    if (v && static_cast<Index>(v->size()) != m) {
      std::ostringstream msg;
      msg << "scenario: 'initial." << field << "' must list one value per vehicle";
      throw InvalidInput(msg.str());
    }
  };
  check_override(initial_positions, "positions");
  check_override(initial_velocities, "velocities");
  check_override(initial_accelerations, "accelerations");
  if (initial_positions) {
    for (Index i = 0; i + 1 < m; ++i) {
      const double gap = (*initial_positions)[static_cast<size_t>(i)] -
                         (*initial_positions)[static_cast<size_t>(i + 1)];
      if (gap < constraints.d_min)
        throw InvalidInput("scenario: 'initial.positions' violate the minimum distance");
    }
  }
  if (initial_velocities)
    for (double v : *initial_velocities)
      if (v < constraints.v_min || v > constraints.v_max)
        throw InvalidInput("scenario: 'initial.velocities' outside bounds");
  if (initial_accelerations)
    for (double a : *initial_accelerations)
      if (a < constraints.a_min || a > constraints.a_max)
        throw InvalidInput("scenario: 'initial.accelerations' outside bounds");
  if (noise) {
    if (static_cast<Index>(noise->accel_std.size()) != m)
      throw InvalidInput("scenario: 'noise.accel_std' must list one value per vehicle");
    for (double s : noise->accel_std)
      if (s < 0.0) throw InvalidInput("scenario: 'noise.accel_std' must be >= 0");
  }
}

PlatoonState initial_conditions(const Scenario& scenario) {
  scenario.validate();
  const Index m = scenario.vehicle_count();
  PlatoonState state;
  state.x.setZero(3 * m);
  const double spacing = scenario.constraints.d_min + 10.0;
  for (Index i = 0; i < m; ++i) {
    state.x(i) = scenario.initial_positions
                     ? (*scenario.initial_positions)[static_cast<size_t>(i)]
                     : -static_cast<double>(i) * spacing;
    if (scenario.initial_velocities)
      state.x(m + i) = (*scenario.initial_velocities)[static_cast<size_t>(i)];
    if (scenario.initial_accelerations)
      state.x(2 * m + i) = (*scenario.initial_accelerations)[static_cast<size_t>(i)];
  }
  return state;
}

Telemetry run_scenario(const Scenario& scenario,
                       std::optional<std::uint64_t> seed_override) {
  scenario.validate();
  const Index m = scenario.vehicle_count();

  Telemetry telemetry;
  telemetry.m = m;
  telemetry.dt = scenario.dt;
  if (scenario.duration_s == 0.0) return telemetry;

  const PlatoonModel model = build_platoon_model(scenario.vehicles, scenario.dt);
  PlatoonState x = initial_conditions(scenario);

  ControllerConfig config;
  config.weights = scenario.weights;
  config.constraints = scenario.constraints;
  config.horizon = scenario.horizon;
  config.reference = ReferenceConfig{scenario.v_d, scenario.k_m, scenario.dt};
  Controller controller(model, config, x, 0);

  // Per-vehicle discretizations and live human target profiles.
  std::vector<VehicleDiscrete> discrete;
  discrete.reserve(static_cast<size_t>(m));
  for (const VehicleParams& veh : scenario.vehicles)
    discrete.push_back(discretize_vehicle(veh, scenario.dt));
  std::vector<const Event*> active_profile(static_cast<size_t>(m), nullptr);

  std::map<Index, std::vector<const Event*>> events_at;
  for (const Event& ev : scenario.events)
    events_at[sample_of(ev.time, scenario.dt)].push_back(&ev);

  std::optional<GaussianSampler> gauss;
  if (scenario.noise)
    gauss.emplace(seed_override.value_or(scenario.noise->seed));

  const Index total = sample_of(scenario.duration_s, scenario.dt);
  telemetry.records.reserve(static_cast<size_t>(total) + 1);
  Vec predicted_prev;

  for (Index k = 0; k <= total; ++k) {
    if (auto it = events_at.find(k); it != events_at.end()) {
      for (const Event* ev : it->second) {
        switch (ev->kind) {
          case Event::Kind::takeover:
            controller.takeover(ev->vehicle, k, x);
            active_profile[static_cast<size_t>(ev->vehicle)] = ev;
            break;
          case Event::Kind::release:
            controller.release(ev->vehicle, k, x);
            active_profile[static_cast<size_t>(ev->vehicle)] = nullptr;
            break;
          case Event::Kind::set_headway:
            controller.set_headway(ev->vehicle, ev->headway);
            break;
        }
      }
    }

    const ControlStep cs = controller.step(x, k);

    // Human-driven vehicles override their commanded increment.
    Vec delta = cs.delta_u;
    const double now = static_cast<double>(k) * scenario.dt;
    for (Index i = 0; i < m; ++i) {
      const Event* ev = active_profile[static_cast<size_t>(i)];
      if (!ev) continue;
      double target = ev->profile.front().second;
      for (const auto& [pt, pv] : ev->profile)
        if (pt <= now + 1e-9) target = pv;
      const double u_new = human_command(discrete[static_cast<size_t>(i)], x.v(i),
                                         x.a(i), target, scenario.constraints);
      delta(i) = u_new - controller.held_control()(i);
    }

    TelemetryRecord rec;
    rec.k = k;
    rec.t = now;
    rec.x = x.x;
    rec.delta_u = delta;
    rec.u = controller.held_control() + delta;
    rec.x_ref = reference_at(config.reference, controller.reference_state(),
                             model.vehicles, controller.headways(), k)
                    .x_star;
    rec.mask = controller.human_mask();
    rec.status = cs.diag.status;
    rec.iterations = cs.diag.iterations;
    rec.active_count = cs.diag.active_count;
    rec.fallback = cs.diag.fallback;
    rec.prediction_error =
        k == 0 ? 0.0 : (x.x - predicted_prev).cwiseAbs().maxCoeff();
    telemetry.records.push_back(std::move(rec));

    if (k == total) break;

    std::optional<Vec> noise;
    if (gauss) {
      Vec w = Vec::Zero(3 * m);
      for (Index i = 0; i < m; ++i)
        w(2 * m + i) = scenario.noise->accel_std[static_cast<size_t>(i)] * (*gauss)();
      noise = std::move(w);
    }

    // The controller's prediction assumes humans follow their predicted
    // increments; reality applies the scripted driver instead.
    predicted_prev = cs.diag.predicted_next;
    const StepResult step =
        step_platoon(model, x, controller.held_control(), delta, noise);
    x = step.state;
    controller.observe_applied(step.applied_u);
  }

  log_info("run_scenario: completed %zu records", telemetry.records.size());
  return telemetry;
}

InvariantReport check_invariants(const Telemetry& telemetry, const Scenario& scenario) {
  constexpr double tol = 1e-6;
  const ConstraintSpec& c = scenario.constraints;
  const Index m = telemetry.m;

  InvariantReport report;
  report.min_gap = std::numeric_limits<double>::infinity();
  report.max_gap = -std::numeric_limits<double>::infinity();
  report.min_velocity = std::numeric_limits<double>::infinity();
  report.max_velocity = -std::numeric_limits<double>::infinity();
  report.min_accel = std::numeric_limits<double>::infinity();
  report.max_accel = -std::numeric_limits<double>::infinity();

  for (const TelemetryRecord& rec : telemetry.records) {
    bool any_human = false;
    for (Index i = 0; i < m; ++i) {
      const bool human = rec.mask[static_cast<size_t>(i)];
      any_human = any_human || human;
      const double v = rec.x(m + i);
      const double a = rec.x(2 * m + i);
      report.min_velocity = std::min(report.min_velocity, v);
      report.max_velocity = std::max(report.max_velocity, v);
      report.min_accel = std::min(report.min_accel, a);
      report.max_accel = std::max(report.max_accel, a);
      int& bucket = human ? report.human_violations : report.state_violations;
      if (v < c.v_min - tol || v > c.v_max + tol) ++bucket;
      if (a < c.a_min - tol || a > c.a_max + tol) ++bucket;
    }
    for (Index i = 0; i + 1 < m; ++i) {
      const double gap = rec.x(i) - rec.x(i + 1);
      report.min_gap = std::min(report.min_gap, gap);
      report.max_gap = std::max(report.max_gap, gap);
      if (gap < c.d_min - tol || gap > c.d_max + tol) ++report.state_violations;
    }
    if (rec.fallback) ++report.fallback_steps;
    if (any_human) ++report.human_steps;
  }
  return report;
}

} // namespace platoon_mpc
