#pragma once

#include <string>

#include <json.hpp>

#include "tff/parser.hpp"
#include "tff/rules.hpp"
#include "tff/types.hpp"

namespace tff {

// Spec record schema (also the source-library fixture record):
// {
//   "task": "turn_screw",
//   "coordinates": "z axis points down into the screw head",
//   "directives": {
//     "translational_x": {"value": 0},
//     "translational_z": {"value": -5, "unit": "N"},
//     ...
//   },
//   "provenance": {"kind": "authored"}            // optional, default authored
//                 {"kind": "generated", "model": "...", "shots": 5}
// }
// Omitted directives default to inactive.
nlohmann::json spec_to_json(const TaskFrameSpec& spec);
TaskFrameSpec spec_from_json(const nlohmann::json& value);

nlohmann::json parse_outcome_to_json(const ParseOutcome& outcome);
ParseOutcome parse_outcome_from_json(const nlohmann::json& value);

nlohmann::json verdict_to_json(const Verdict& verdict);
Verdict verdict_from_json(const nlohmann::json& value);

// Envelope record: any of max_force_n, max_torque_nm, max_angular_rate_rad_s,
// max_linear_rate_cm_s; omitted fields keep their defaults.
SafetyEnvelope envelope_from_json(const nlohmann::json& value);

}  // namespace tff
