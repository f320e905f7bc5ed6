#include "platoon_mpc/outputs.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "platoon_mpc/scenario_json.hpp"

namespace platoon_mpc {

namespace {

std::string round_trip(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("outputs: cannot write file '" + path + "'");
  return out;
}

} // namespace

std::string scenario_hash(const Scenario& scenario) {
  const std::string text = scenario_to_json(scenario);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_timeseries_csv(const std::string& path, const Scenario& scenario,
                          const Telemetry& telemetry) {
  const Index m = scenario.vehicle_count();
  std::ofstream out = open_output(path);

  out << "t";
  for (Index i = 1; i <= m; ++i) out << ",p" << i;
  for (Index i = 1; i <= m; ++i) out << ",v" << i;
  for (Index i = 1; i <= m; ++i) out << ",a" << i;
  for (Index i = 1; i <= m; ++i) out << ",u" << i;
  for (Index i = 1; i < m; ++i) out << ",gap" << i;
  out << ",v_ref,a_ref,human,status,iterations,active_count,fallback,prediction_error\n";

  for (const TelemetryRecord& rec : telemetry.records) {
    out << round_trip(rec.t);
    for (Index i = 0; i < 3 * m; ++i) out << ',' << round_trip(rec.x(i));
    for (Index i = 0; i < m; ++i) out << ',' << round_trip(rec.u(i));
    for (Index i = 0; i + 1 < m; ++i) out << ',' << round_trip(rec.x(i) - rec.x(i + 1));
    out << ',' << round_trip(rec.x_ref(m)) << ',' << round_trip(rec.x_ref(2 * m));
    out << ',';
    for (Index i = 0; i < m; ++i) out << (rec.mask[static_cast<size_t>(i)] ? '1' : '0');
    out << ',' << to_string(rec.status) << ',' << rec.iterations << ',' << rec.active_count
        << ',' << (rec.fallback ? 1 : 0) << ',' << round_trip(rec.prediction_error) << '\n';
  }
  if (!out.flush()) throw InvalidInput("outputs: failed writing '" + path + "'");
}

void write_summary_json(const std::string& path, const Scenario& scenario,
                        const Telemetry& telemetry, const InvariantReport& report,
                        std::optional<std::uint64_t> seed) {
  using nlohmann::json;
  const Index m = scenario.vehicle_count();

  int optimal_steps = 0;
  int infeasible_steps = 0;
  int iteration_limit_steps = 0;
  long long total_iterations = 0;
  int max_iterations = 0;
  Index max_active = 0;
  for (const TelemetryRecord& rec : telemetry.records) {
    switch (rec.status) {
      case QpStatus::optimal: ++optimal_steps; break;
      case QpStatus::infeasible: ++infeasible_steps; break;
      case QpStatus::max_iterations: ++iteration_limit_steps; break;
    }
    total_iterations += rec.iterations;
    max_iterations = std::max(max_iterations, rec.iterations);
    max_active = std::max(max_active, rec.active_count);
  }

  json root;
  root["scenario"] = json{{"name", scenario.name},
                          {"hash", scenario_hash(scenario)},
                          {"vehicles", m},
                          {"dt", scenario.dt},
                          {"duration_s", scenario.duration_s},
                          {"horizon", scenario.horizon}};
  if (seed)
    root["seed"] = *seed;
  else
    root["seed"] = nullptr;
  root["steps"] = telemetry.records.size();
  root["solver"] = json{{"optimal_steps", optimal_steps},
                        {"infeasible_steps", infeasible_steps},
                        {"iteration_limit_steps", iteration_limit_steps},
                        {"fallback_steps", report.fallback_steps},
                        {"total_iterations", total_iterations},
                        {"max_iterations", max_iterations},
                        {"max_active_set", max_active}};
  root["invariants"] = json{{"ok", report.ok()},
                            {"state_violations", report.state_violations},
                            {"human_violations", report.human_violations},
                            {"human_steps", report.human_steps},
                            {"min_gap", report.min_gap},
                            {"max_gap", report.max_gap},
                            {"min_velocity", report.min_velocity},
                            {"max_velocity", report.max_velocity},
                            {"min_accel", report.min_accel},
                            {"max_accel", report.max_accel}};
  if (!telemetry.records.empty()) {
    const Vec& x = telemetry.records.back().x;
    std::vector<double> p(static_cast<size_t>(m)), v(static_cast<size_t>(m)),
        a(static_cast<size_t>(m));
    for (Index i = 0; i < m; ++i) {
      p[static_cast<size_t>(i)] = x(i);
      v[static_cast<size_t>(i)] = x(m + i);
      a[static_cast<size_t>(i)] = x(2 * m + i);
    }
    root["final_state"] = json{{"p", p}, {"v", v}, {"a", a}};
  } else {
    root["final_state"] = nullptr;
  }

  std::ofstream out = open_output(path);
  out << root.dump(2) << '\n';
  if (!out.flush()) throw InvalidInput("outputs: failed writing '" + path + "'");
}

} // namespace platoon_mpc
