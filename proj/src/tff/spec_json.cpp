#include "tff/spec_json.hpp"

namespace tff {

using nlohmann::json;

json spec_to_json(const TaskFrameSpec& spec) {
  json directives = json::object();
  for (Axis axis : kAllAxes) {
    const AxisDirective& d = spec.directive(axis);
    json entry = {{"value", d.value}};
    if (d.active()) entry["unit"] = std::string(unit_token(d.unit));
    directives[std::string(axis_param_name(axis))] = std::move(entry);
  }
  json out = {
      {"task", spec.task().normalized},
      {"coordinates", spec.coordinates().raw_text},
      {"directives", std::move(directives)},
  };
  if (spec.task().raw != spec.task().normalized) out["task_raw"] = spec.task().raw;
  const Provenance& p = spec.provenance();
  if (p.kind == Provenance::Kind::Authored) {
    out["provenance"] = {{"kind", "authored"}};
  } else {
    out["provenance"] = {{"kind", "generated"}, {"model", p.model_id}, {"shots", p.shots}};
  }
  return out;
}

TaskFrameSpec spec_from_json(const json& value) {
  if (!value.is_object()) {
    raise(ErrorCode::InvalidSpec, "spec record must be a JSON object");
  }
  if (!value.contains("task") || !value["task"].is_string()) {
    raise(ErrorCode::InvalidSpec, "spec record needs a \"task\" string");
  }
  std::string stored = value["task"].get<std::string>();
  TaskName task = normalize_task_name(stored);
  task.raw = value.value("task_raw", stored);

  std::string coordinates = value.value("coordinates", std::string{});
  if (coordinates.empty()) {
    raise(ErrorCode::InvalidSpec, "spec record needs non-empty \"coordinates\"");
  }

  std::vector<AxisDirective> directives;
  if (value.contains("directives")) {
    const json& block = value["directives"];
    if (!block.is_object()) {
      raise(ErrorCode::InvalidSpec, "\"directives\" must be an object");
    }
    for (const auto& [key, entry] : block.items()) {
      auto axis = axis_from_param_name(key);
      if (!axis) {
        raise(ErrorCode::InvalidSpec, "unknown axis \"" + key + "\"");
      }
      double v = entry.value("value", 0.0);
      if (entry.contains("unit")) {
        auto unit = parse_unit_token(entry["unit"].get<std::string>());
        if (!unit) {
          raise(ErrorCode::UnknownUnit,
                "unknown unit \"" + entry["unit"].get<std::string>() + "\" on " + key);
        }
        if (v == 0.0) {
          directives.push_back(make_inactive_directive(*axis));
        } else {
          directives.push_back(make_directive(*axis, v, *unit));
        }
      } else if (v == 0.0) {
        directives.push_back(make_inactive_directive(*axis));
      } else {
        raise(ErrorCode::InvalidSpec,
              "non-zero value without a unit on " + key);
      }
    }
  }

  Provenance provenance = Provenance::authored();
  if (value.contains("provenance")) {
    const json& p = value["provenance"];
    if (p.value("kind", "authored") == "generated") {
      provenance = Provenance::generated(p.value("model", std::string{}),
                                         p.value("shots", 0));
    }
  }

  return TaskFrameSpec::create(std::move(task), make_coordinate_setting(coordinates),
                               directives, std::move(provenance));
}

json parse_outcome_to_json(const ParseOutcome& outcome) {
  json out;
  if (outcome.ok()) {
    out["status"] = "ok";
    out["spec"] = spec_to_json(*outcome.spec);
  } else if (outcome.reason) {
    out["status"] = "rejected";
    out["reason"] = std::string(parse_reason_name(*outcome.reason));
  } else {
    out["status"] = "skipped";  // no completion to parse (backend error)
  }
  out["warnings"] = outcome.warnings;
  return out;
}

ParseOutcome parse_outcome_from_json(const json& value) {
  if (!value.is_object() || !value.contains("status")) {
    raise(ErrorCode::SchemaMismatch, "parse outcome needs a status field");
  }
  ParseOutcome outcome;
  const std::string status = value["status"].get<std::string>();
  if (status == "ok") {
    outcome.spec = spec_from_json(value.at("spec"));
  } else if (status == "rejected") {
    auto reason = parse_reason_from_name(value.value("reason", ""));
    if (!reason) {
      raise(ErrorCode::SchemaMismatch,
            "unknown parse reason \"" + value.value("reason", "") + "\"");
    }
    outcome.reason = *reason;
  } else if (status != "skipped") {
    raise(ErrorCode::SchemaMismatch, "unknown parse status \"" + status + "\"");
  }
  if (value.contains("warnings")) {
    outcome.warnings = value["warnings"].get<std::vector<std::string>>();
  }
  return outcome;
}

json verdict_to_json(const Verdict& verdict) {
  json violations = json::array();
  for (const SafetyViolation& v : verdict.safety_violations) {
    violations.push_back({{"axis", std::string(axis_param_name(v.axis))},
                          {"value", v.value},
                          {"bound", v.bound},
                          {"limit", v.limit}});
  }
  return {{"correct", verdict.correct},
          {"failed_predicates", verdict.failed_predicates},
          {"safety_violations", std::move(violations)},
          {"notes", verdict.notes}};
}

Verdict verdict_from_json(const json& value) {
  if (!value.is_object() || !value.contains("correct")) {
    raise(ErrorCode::SchemaMismatch, "verdict needs a correct field");
  }
  Verdict verdict;
  verdict.correct = value["correct"].get<bool>();
  if (value.contains("failed_predicates")) {
    verdict.failed_predicates =
        value["failed_predicates"].get<std::vector<std::string>>();
  }
  verdict.notes = value.value("notes", std::string{});
  if (value.contains("safety_violations")) {
    for (const json& entry : value["safety_violations"]) {
      auto axis = axis_from_param_name(entry.value("axis", ""));
      if (!axis) {
        raise(ErrorCode::SchemaMismatch,
              "unknown axis in safety violation: " + entry.value("axis", ""));
      }
      verdict.safety_violations.push_back(SafetyViolation{
          *axis, entry.value("value", 0.0), entry.value("bound", 0.0),
          entry.value("limit", std::string{})});
    }
  }
  return verdict;
}

SafetyEnvelope envelope_from_json(const json& value) {
  if (!value.is_object()) {
    raise(ErrorCode::InvalidArgument, "safety envelope must be a JSON object");
  }
  SafetyEnvelope envelope;
  envelope.max_force_n = value.value("max_force_n", envelope.max_force_n);
  envelope.max_torque_nm = value.value("max_torque_nm", envelope.max_torque_nm);
  envelope.max_angular_rate_rad_s =
      value.value("max_angular_rate_rad_s", envelope.max_angular_rate_rad_s);
  envelope.max_linear_rate_cm_s =
      value.value("max_linear_rate_cm_s", envelope.max_linear_rate_cm_s);
  return envelope;
}

}  // namespace tff
