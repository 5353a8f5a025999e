#pragma once

// JSON wire format for pulse schedules:
//   {"segments": [{"duration": ..., "couplings": {"<block>:<a>-<b>":
//       <number> | {"kind": "sin2", "amplitude": ...}}}],
//    "metadata": {...}, "notes": [...]}
// Doubles survive a serialize/parse round trip bit-exactly.

#include <string>

#include "dfsblock/dynamics.hpp"

namespace dfsblock {

std::string schedule_to_json(const PulseSchedule& schedule, int indent = 2);
PulseSchedule schedule_from_json(const std::string& text);

std::string edge_key(const EdgeRef& edge);
EdgeRef parse_edge_key(const std::string& key);

}  // namespace dfsblock
