#include "platoon_mpc/outputs.hpp"
#include "platoon_mpc/scenario_json.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "support.hpp"

using namespace platoon_mpc;

namespace {

const char* kMinimalJson = R"({
  "dt": 0.5,
  "duration_s": 1.0,
  "v_d": 10.0,
  "k_m": 2,
  "horizon": 3,
  "vehicles": [{ "tau": 0.4, "length": 4.0, "standstill": 5.0, "headway": 1.0 }],
  "weights": { "q1": 1.0, "q2": 1.0, "q3": 1.0, "q4": 1.0, "r": 2.0 },
  "constraints": { "d_min": 2.0, "d_max": 200.0, "v_min": 0.0, "v_max": 20.0,
                   "a_min": -6.0, "a_max": 3.0 }
})";

/// Scenario exercising every optional block, for round-trip checks.
Scenario fully_loaded() {
  Scenario s = test_support::small_scenario(2);
  s.duration_s = 10.0;
  Event take;
  take.kind = Event::Kind::takeover;
  take.time = 2.0;
  take.vehicle = 1;
  take.profile = {{2.0, 5.0}, {6.0, 8.0}};
  Event rel;
  rel.kind = Event::Kind::release;
  rel.time = 8.0;
  rel.vehicle = 1;
  Event head;
  head.kind = Event::Kind::set_headway;
  head.time = 8.0;
  head.vehicle = 0;
  head.headway = 1.5;
  s.events = {take, rel, head};
  s.initial_positions = {{0.0, -15.0}};
  s.initial_velocities = {{1.0, 2.0}};
  s.initial_accelerations = {{0.0, 0.1}};
  s.noise = NoiseConfig{42, {0.01, 0.02}};
  return s;
}

std::string thrown_message(const std::string& json_text) {
  try {
    parse_scenario(json_text);
  } catch (const InvalidInput& e) {
    return e.what();
  }
  return "";
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in.good()) << path;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

} // namespace

TEST(ParseScenario, AppliesDefaultsForOptionalBlocks) {
  const Scenario s = parse_scenario(kMinimalJson);
  EXPECT_EQ(s.name, "scenario"); // default name
  EXPECT_EQ(s.vehicle_count(), 1);
  EXPECT_DOUBLE_EQ(s.dt, 0.5);
  EXPECT_EQ(s.k_m, 2);
  EXPECT_EQ(s.horizon, 3);
  EXPECT_TRUE(s.events.empty());
  EXPECT_FALSE(s.initial_positions.has_value());
  EXPECT_FALSE(s.noise.has_value());
  EXPECT_DOUBLE_EQ(s.weights.r, 2.0);
  EXPECT_DOUBLE_EQ(s.constraints.v_max, 20.0);
}

TEST(ParseScenario, EventVehiclesAreOneBasedInJson) {
  const std::string text = scenario_to_json(fully_loaded());
  const Scenario parsed = parse_scenario(text);
  ASSERT_EQ(parsed.events.size(), 3u);
  EXPECT_EQ(parsed.events[0].vehicle, 1); // "vehicle": 2 in the JSON
  EXPECT_EQ(parsed.events[2].vehicle, 0); // "vehicle": 1 in the JSON
  EXPECT_NE(text.find("\"vehicle\": 2"), std::string::npos);

  // Out-of-range 1-based index is reported against the offending event.
  std::string bad = kMinimalJson;
  bad.insert(bad.rfind('}'),
             R"(, "events": [{ "type": "release", "time": 0.5, "vehicle": 2 }])");
  const std::string msg = thrown_message(bad);
  EXPECT_NE(msg.find("events[0]"), std::string::npos) << msg;
  EXPECT_NE(msg.find("1..1"), std::string::npos) << msg;
}

TEST(ParseScenario, RoundTripIsStable) {
  const Scenario original = fully_loaded();
  const std::string once = scenario_to_json(original);
  const Scenario reparsed = parse_scenario(once);
  const std::string twice = scenario_to_json(reparsed);
  EXPECT_EQ(once, twice);

  EXPECT_EQ(reparsed.name, original.name);
  EXPECT_EQ(reparsed.events.size(), original.events.size());
  EXPECT_EQ(reparsed.events[0].profile, original.events[0].profile);
  ASSERT_TRUE(reparsed.noise.has_value());
  EXPECT_EQ(reparsed.noise->seed, 42u);
  EXPECT_EQ(reparsed.noise->accel_std, original.noise->accel_std);
  EXPECT_EQ(reparsed.initial_positions, original.initial_positions);
}

TEST(ParseScenario, RejectsMalformedInput) {
  EXPECT_NE(thrown_message("{ not json").find("malformed JSON"), std::string::npos);
  EXPECT_NE(thrown_message("[1, 2]").find("top-level"), std::string::npos);

  std::string missing = kMinimalJson;
  missing.replace(missing.find("duration_s"), 10, "duration_x");
  EXPECT_NE(thrown_message(missing).find("missing key 'duration_s'"),
            std::string::npos);

  std::string bad_weight = kMinimalJson;
  bad_weight.replace(bad_weight.find("\"q1\": 1.0"), 9, "\"q1\": \"x\"");
  EXPECT_NE(thrown_message(bad_weight).find("'q1' must be a number"),
            std::string::npos);

  std::string bad_profile = kMinimalJson;
  bad_profile.insert(bad_profile.rfind('}'),
                     R"(, "events": [{ "type": "takeover", "time": 0.5,
                        "vehicle": 1, "profile": [[0.5]] }])");
  EXPECT_NE(thrown_message(bad_profile).find("profile"), std::string::npos);

  std::string bad_seed = kMinimalJson;
  bad_seed.insert(bad_seed.rfind('}'),
                  R"(, "noise": { "seed": -1, "accel_std": [0.1] })");
  EXPECT_NE(thrown_message(bad_seed).find("seed"), std::string::npos);

  EXPECT_THROW(load_scenario("/definitely/not/a/file.json"), InvalidInput);
}

TEST(ScenarioHash, StableAndSensitiveToConfiguration) {
  const Scenario a = fully_loaded();
  const std::string h = scenario_hash(a);
  ASSERT_EQ(h.size(), 16u);
  EXPECT_EQ(h.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_EQ(scenario_hash(a), h);

  Scenario b = a;
  b.v_d += 0.1;
  EXPECT_NE(scenario_hash(b), h);
}

TEST(TimeseriesCsv, HeaderAndRowsMatchTheDocumentedLayout) {
  Scenario s = test_support::small_scenario(2);
  s.duration_s = 2.0;
  const Telemetry t = run_scenario(s);
  const std::string path = testing::TempDir() + "timeseries.csv";
  write_timeseries_csv(path, s, t);

  const std::vector<std::string> lines = read_lines(path);
  ASSERT_EQ(lines.size(), 1u + t.records.size());
  EXPECT_EQ(lines[0],
            "t,p1,p2,v1,v2,a1,a2,u1,u2,gap1,v_ref,a_ref,human,status,"
            "iterations,active_count,fallback,prediction_error");

  const std::vector<std::string> row = split(lines[1]);
  ASSERT_EQ(row.size(), 18u);
  EXPECT_EQ(std::stod(row[0]), 0.0);
  // gap1 column reproduces p1 - p2 exactly (round-trip formatting).
  EXPECT_EQ(std::stod(row[9]), std::stod(row[1]) - std::stod(row[2]));
  EXPECT_EQ(row[12], "00");      // no human vehicles
  EXPECT_EQ(row[13], "optimal");
  EXPECT_EQ(row[16], "0");       // no fallback

  // A zero-duration run still documents its shape.
  Scenario empty = s;
  empty.duration_s = 0.0;
  write_timeseries_csv(path, empty, run_scenario(empty));
  EXPECT_EQ(read_lines(path).size(), 1u);

  EXPECT_THROW(write_timeseries_csv("/definitely/not/a/dir/x.csv", s, t),
               InvalidInput);
}

TEST(SummaryJson, ReportsRunSolverAndAuditSections) {
  Scenario s = test_support::small_scenario(2);
  s.duration_s = 2.0;
  const Telemetry t = run_scenario(s);
  const InvariantReport report = check_invariants(t, s);
  const std::string path = testing::TempDir() + "summary.json";

  write_summary_json(path, s, t, report, std::nullopt);
  std::ifstream in(path);
  const nlohmann::json root = nlohmann::json::parse(in);

  EXPECT_EQ(root.at("scenario").at("name"), "unit");
  EXPECT_EQ(root.at("scenario").at("hash"), scenario_hash(s));
  EXPECT_EQ(root.at("scenario").at("vehicles"), 2);
  EXPECT_TRUE(root.at("seed").is_null());
  EXPECT_EQ(root.at("steps").get<size_t>(), t.records.size());
  EXPECT_EQ(root.at("solver").at("optimal_steps").get<size_t>(), t.records.size());
  EXPECT_EQ(root.at("solver").at("fallback_steps"), 0);
  EXPECT_TRUE(root.at("invariants").at("ok").get<bool>());
  EXPECT_DOUBLE_EQ(root.at("invariants").at("min_gap").get<double>(), report.min_gap);
  ASSERT_EQ(root.at("final_state").at("v").size(), 2u);
  EXPECT_DOUBLE_EQ(root.at("final_state").at("v")[1].get<double>(),
                   t.records.back().x(3));

  write_summary_json(path, s, t, report, 5);
  std::ifstream in2(path);
  const nlohmann::json seeded = nlohmann::json::parse(in2);
  EXPECT_EQ(seeded.at("seed").get<std::uint64_t>(), 5u);
}
