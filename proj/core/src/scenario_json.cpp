#include "platoon_mpc/scenario_json.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace platoon_mpc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  const std::string where = context.empty() ? "" : " " + context;
  throw InvalidInput("scenario" + where + ": " + what);
}

const json& member(const json& node, const std::string& context, const char* key) {
  if (!node.is_object()) fail(context, "expected an object");
  const auto it = node.find(key);
  if (it == node.end()) fail(context, std::string("missing key '") + key + "'");
  return *it;
}

const json* optional_member(const json& node, const std::string& context, const char* key) {
  if (!node.is_object()) fail(context, "expected an object");
  const auto it = node.find(key);
  return it == node.end() || it->is_null() ? nullptr : &*it;
}

double as_number(const json& value, const std::string& context, const char* key) {
  if (!value.is_number()) fail(context, std::string("'") + key + "' must be a number");
  return value.get<double>();
}

double number_at(const json& node, const std::string& context, const char* key) {
  return as_number(member(node, context, key), context, key);
}

Index integer_at(const json& node, const std::string& context, const char* key) {
  const json& value = member(node, context, key);
  if (!value.is_number_integer())
    fail(context, std::string("'") + key + "' must be an integer");
  return value.get<Index>();
}

std::string string_at(const json& node, const std::string& context, const char* key) {
  const json& value = member(node, context, key);
  if (!value.is_string()) fail(context, std::string("'") + key + "' must be a string");
  return value.get<std::string>();
}

std::vector<double> number_array(const json& value, const std::string& context) {
  if (!value.is_array()) fail(context, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& entry : value) {
    if (!entry.is_number()) fail(context, "expected an array of numbers");
    out.push_back(entry.get<double>());
  }
  return out;
}

VehicleParams parse_vehicle(const json& node, const std::string& context) {
  VehicleParams v;
  v.tau = number_at(node, context, "tau");
  v.length = number_at(node, context, "length");
  v.standstill = number_at(node, context, "standstill");
  v.headway = number_at(node, context, "headway");
  return v;
}

CostWeights parse_weights(const json& node, const std::string& context) {
  CostWeights w;
  w.q1 = number_at(node, context, "q1");
  w.q2 = number_at(node, context, "q2");
  w.q3 = number_at(node, context, "q3");
  w.q4 = number_at(node, context, "q4");
  w.r = number_at(node, context, "r");
  return w;
}

ConstraintSpec parse_constraints(const json& node, const std::string& context) {
  ConstraintSpec c;
  c.d_min = number_at(node, context, "d_min");
  c.d_max = number_at(node, context, "d_max");
  c.v_min = number_at(node, context, "v_min");
  c.v_max = number_at(node, context, "v_max");
  c.a_min = number_at(node, context, "a_min");
  c.a_max = number_at(node, context, "a_max");
  return c;
}

Event parse_event(const json& node, const std::string& context, Index vehicle_count) {
  Event e;
  const std::string type = string_at(node, context, "type");
  if (type == "takeover") {
    e.kind = Event::Kind::takeover;
  } else if (type == "release") {
    e.kind = Event::Kind::release;
  } else if (type == "set_headway") {
    e.kind = Event::Kind::set_headway;
  } else {
    fail(context, "'type' must be one of \"takeover\", \"release\", \"set_headway\"");
  }
  e.time = number_at(node, context, "time");

  const Index vehicle = integer_at(node, context, "vehicle");
  if (vehicle < 1 || vehicle > vehicle_count)
    fail(context, "'vehicle' must be in 1.." + std::to_string(vehicle_count));
  e.vehicle = vehicle - 1;

  if (e.kind == Event::Kind::takeover) {
    const json& profile = member(node, context, "profile");
    if (!profile.is_array() || profile.empty())
      fail(context, "'profile' must be a non-empty array of [time, velocity] pairs");
    for (const auto& pair : profile) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
        fail(context, "'profile' entries must be [time, velocity] number pairs");
      e.profile.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
  }
  if (e.kind == Event::Kind::set_headway) {
    e.headway = number_at(node, context, "headway");
  }
  return e;
}

json vehicle_to_json(const VehicleParams& v) {
  return json{{"tau", v.tau},
              {"length", v.length},
              {"standstill", v.standstill},
              {"headway", v.headway}};
}

json event_to_json(const Event& e) {
  json node;
  node["time"] = e.time;
  node["vehicle"] = e.vehicle + 1;
  switch (e.kind) {
    case Event::Kind::takeover: {
      node["type"] = "takeover";
      json profile = json::array();
      for (const auto& [t, v] : e.profile) profile.push_back(json::array({t, v}));
      node["profile"] = std::move(profile);
      break;
    }
    case Event::Kind::release:
      node["type"] = "release";
      break;
    case Event::Kind::set_headway:
      node["type"] = "set_headway";
      node["headway"] = e.headway;
      break;
  }
  return node;
}

} // namespace

Scenario parse_scenario(const std::string& json_text) {
  json root = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) throw InvalidInput("scenario: malformed JSON");
  if (!root.is_object()) throw InvalidInput("scenario: top-level value must be an object");

  Scenario s;
  if (const json* name = optional_member(root, "", "name")) {
    if (!name->is_string()) fail("", "'name' must be a string");
    s.name = name->get<std::string>();
  }
  s.dt = number_at(root, "", "dt");
  s.duration_s = number_at(root, "", "duration_s");
  s.v_d = number_at(root, "", "v_d");
  s.k_m = integer_at(root, "", "k_m");
  s.horizon = integer_at(root, "", "horizon");

  const json& vehicles = member(root, "", "vehicles");
  if (!vehicles.is_array() || vehicles.empty())
    fail("", "'vehicles' must be a non-empty array");
  for (std::size_t i = 0; i < vehicles.size(); ++i)
    s.vehicles.push_back(parse_vehicle(vehicles[i], "vehicles[" + std::to_string(i) + "]"));

  s.weights = parse_weights(member(root, "", "weights"), "weights");
  s.constraints = parse_constraints(member(root, "", "constraints"), "constraints");

  if (const json* events = optional_member(root, "", "events")) {
    if (!events->is_array()) fail("", "'events' must be an array");
    for (std::size_t i = 0; i < events->size(); ++i)
      s.events.push_back(
          parse_event((*events)[i], "events[" + std::to_string(i) + "]", s.vehicle_count()));
  }

  const auto parse_initial = [&](const char* key) -> std::optional<std::vector<double>> {
    const json* value = optional_member(root, "", key);
    if (!value) return std::nullopt;
    auto out = number_array(*value, std::string("'") + key + "'");
    if (static_cast<Index>(out.size()) != s.vehicle_count())
      fail("", std::string("'") + key + "' must list one value per vehicle");
    return out;
  };
  s.initial_positions = parse_initial("initial_positions");
  s.initial_velocities = parse_initial("initial_velocities");
  s.initial_accelerations = parse_initial("initial_accelerations");

  if (const json* noise = optional_member(root, "", "noise")) {
    NoiseConfig n;
    const json& seed = member(*noise, "noise", "seed");
    if (!seed.is_number_integer() || seed.get<long long>() < 0)
      fail("noise", "'seed' must be a non-negative integer");
    n.seed = seed.get<std::uint64_t>();
    n.accel_std = number_array(member(*noise, "noise", "accel_std"), "noise 'accel_std'");
    if (static_cast<Index>(n.accel_std.size()) != s.vehicle_count())
      fail("noise", "'accel_std' must list one value per vehicle");
    s.noise = std::move(n);
  }

  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("scenario: cannot read file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

std::string scenario_to_json(const Scenario& scenario) {
  json root;
  root["name"] = scenario.name;
  root["dt"] = scenario.dt;
  root["duration_s"] = scenario.duration_s;
  root["v_d"] = scenario.v_d;
  root["k_m"] = scenario.k_m;
  root["horizon"] = scenario.horizon;

  json vehicles = json::array();
  for (const auto& v : scenario.vehicles) vehicles.push_back(vehicle_to_json(v));
  root["vehicles"] = std::move(vehicles);

  root["weights"] = json{{"q1", scenario.weights.q1},
                         {"q2", scenario.weights.q2},
                         {"q3", scenario.weights.q3},
                         {"q4", scenario.weights.q4},
                         {"r", scenario.weights.r}};
  root["constraints"] = json{{"d_min", scenario.constraints.d_min},
                             {"d_max", scenario.constraints.d_max},
                             {"v_min", scenario.constraints.v_min},
                             {"v_max", scenario.constraints.v_max},
                             {"a_min", scenario.constraints.a_min},
                             {"a_max", scenario.constraints.a_max}};

  if (!scenario.events.empty()) {
    json events = json::array();
    for (const auto& e : scenario.events) events.push_back(event_to_json(e));
    root["events"] = std::move(events);
  }
  if (scenario.initial_positions) root["initial_positions"] = *scenario.initial_positions;
  if (scenario.initial_velocities) root["initial_velocities"] = *scenario.initial_velocities;
  if (scenario.initial_accelerations)
    root["initial_accelerations"] = *scenario.initial_accelerations;
  if (scenario.noise) {
    root["noise"] = json{{"seed", scenario.noise->seed}, {"accel_std", scenario.noise->accel_std}};
  }
  return root.dump(2) + "\n";
}

} // namespace platoon_mpc
