#include "dfsblock/schedule_io.hpp"

#include <json.hpp>

#include <sstream>

namespace dfsblock {

using nlohmann::json;

std::string edge_key(const EdgeRef& edge) {
  std::ostringstream os;
  os << edge.block << ":" << edge.a << "-" << edge.b;
  return os.str();
}

EdgeRef parse_edge_key(const std::string& key) {
  EdgeRef edge;
  char colon = 0, dash = 0;
  std::istringstream is(key);
  if (!(is >> edge.block >> colon >> edge.a >> dash >> edge.b) || colon != ':' || dash != '-')
    throw ValidationError("malformed edge key: " + key);
  return edge;
}

namespace {

json ramp_to_json(const RampSpec& ramp) {
  if (ramp.is_constant()) return ramp.amplitude;
  json j;
  j["kind"] = "sin2";
  j["amplitude"] = ramp.amplitude;
  return j;
}

RampSpec ramp_from_json(const json& j) {
  if (j.is_number()) return RampSpec::constant(j.get<double>());
  if (!j.is_object() || !j.contains("kind"))
    throw ValidationError("malformed ramp spec in schedule");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "const") return RampSpec::constant(j.at("value").get<double>());
  if (kind == "sin2") return RampSpec::sin2(j.at("amplitude").get<double>());
  throw ValidationError("unknown ramp kind: " + kind);
}

}  // namespace

std::string schedule_to_json(const PulseSchedule& schedule, int indent) {
  json j;
  j["segments"] = json::array();
  for (const auto& seg : schedule.segments) {
    json js;
    js["duration"] = seg.duration;
    js["couplings"] = json::object();
    for (const auto& [edge, ramp] : seg.couplings) js["couplings"][edge_key(edge)] = ramp_to_json(ramp);
    j["segments"].push_back(std::move(js));
  }
  j["metadata"] = json::object();
  for (const auto& [key, value] : schedule.metadata) j["metadata"][key] = value;
  j["notes"] = schedule.notes;
  return j.dump(indent);
}

PulseSchedule schedule_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("schedule parse error: ") + e.what());
  }
  PulseSchedule schedule;
  if (!j.contains("segments") || !j["segments"].is_array())
    throw ValidationError("schedule JSON lacks a segments array");
  for (const auto& js : j["segments"]) {
    Segment seg;
    seg.duration = js.at("duration").get<double>();
    if (js.contains("couplings"))
      for (const auto& [key, value] : js["couplings"].items())
        seg.couplings[parse_edge_key(key)] = ramp_from_json(value);
    schedule.segments.push_back(std::move(seg));
  }
  if (j.contains("metadata"))
    for (const auto& [key, value] : j["metadata"].items())
      schedule.metadata[key] = value.get<double>();
  if (j.contains("notes"))
    for (const auto& note : j["notes"]) schedule.notes.push_back(note.get<std::string>());
  return schedule;
}

}  // namespace dfsblock
