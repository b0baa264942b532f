#include "tff/rules.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tff {

namespace {

using nlohmann::json;

// Fixture content for the 30-task requirement catalog, aliases intact.
// RuleSet::builtin() parses this same text, so the shipped file and the
// compiled-in catalog cannot drift apart.
constexpr const char* kCanonicalRulesJson = R"json({
  "schema": "tff.metric_rules.v1",
  "rules": [
    {"task_no": 1, "task": "cut pizza",
     "requirement": "1 translational direction activated.",
     "predicates": [{"kind": "activation_count", "axis_class": "translational", "min": 1, "max": 1}]},
    {"task_no": 2, "task": "scrub desk with bench brush",
     "requirement": "1 or 2 translational directions activated, must apply force on plane.",
     "predicates": [{"kind": "activation_count", "axis_class": "translational", "min": 1, "max": 2},
                    {"kind": "plane_force"}]},
    {"task_no": 3, "task": "spear cake with fork",
     "requirement": "only z translational direction activated.",
     "predicates": [{"kind": "only_axis_active", "axis_class": "translational"}]},
    {"task_no": 4, "task": "fasten screw with screwdriver",
     "requirement": "z angular direction activated.",
     "predicates": [{"kind": "activation_count", "axis_class": "angular", "min": 1, "max": 1}]},
    {"task_no": 5, "task": "loosen screw with screwdriver",
     "requirement": "opposite as Task 4.",
     "same_as": [4],
     "predicates": [{"kind": "opposite_of", "reference": 4, "axis_class": "angular"}]},
    {"task_no": 6, "task": "unlock lock with key",
     "requirement": "z angular direction activated.",
     "predicates": [{"kind": "activation_count", "axis_class": "angular", "min": 1, "max": 1}]},
    {"task_no": 7, "task": "fasten nut with wrench",
     "requirement": "z angular direction activated.",
     "predicates": [{"kind": "activation_count", "axis_class": "angular", "min": 1, "max": 1}]},
    {"task_no": 8, "task": "loosen nut with wrench",
     "requirement": "opposite as Task 7.",
     "same_as": [7],
     "predicates": [{"kind": "opposite_of", "reference": 7, "axis_class": "angular"}]},
    {"task_no": 9, "task": "spread paint with brush",
     "requirement": "translational direction on x-y plane activated.",
     "predicates": [{"kind": "activation_count", "axis_class": "translational", "min": 1, "max": 2}]},
    {"task_no": 10, "task": "hammer in nail",
     "requirement": "only z translational direction activated.",
     "predicates": [{"kind": "only_axis_active", "axis_class": "translational"}]},
    {"task_no": 11, "task": "rasp wood",
     "requirement": "same as Task 2.",
     "same_as": [2]},
    {"task_no": 12, "task": "scrape substance from surface",
     "requirement": "same as Task 2.",
     "same_as": [2]},
    {"task_no": 13, "task": "peel potato",
     "requirement": "1 translational direction activated, must apply force on plane.",
     "predicates": [{"kind": "activation_count", "axis_class": "translational", "min": 1, "max": 1},
                    {"kind": "plane_force"}]},
    {"task_no": 14, "task": "slice cucumber",
     "requirement": "same as Task 1.",
     "same_as": [1]},
    {"task_no": 15, "task": "flip bread",
     "requirement": "1 angular direction activated.",
     "predicates": [{"kind": "activation_count", "axis_class": "angular", "min": 1, "max": 1}]},
    {"task_no": 16, "task": "shave object",
     "requirement": "same as Task 2.",
     "same_as": [2]},
    {"task_no": 17, "task": "use roller to roll out dough",
     "requirement": "same as Task 2.",
     "same_as": [2]},
    {"task_no": 18, "task": "insert peg into pegboard",
     "requirement": "same as Task 3.",
     "same_as": [3]},
    {"task_no": 19, "task": "brush across tray",
     "requirement": "same as Task 2 or Task 9.",
     "same_as": [2, 9]},
    {"task_no": 20, "task": "insert straw through cup lid",
     "requirement": "1 translational direction activated, position control.",
     "predicates": [{"kind": "activation_count", "axis_class": "translational", "min": 1, "max": 1},
                    {"kind": "mode_required", "axis_class": "translational", "mode": "position_velocity"}]},
    {"task_no": 21, "task": "open door from hinge",
     "requirement": "only z angular direction activated.",
     "predicates": [{"kind": "only_axis_active", "axis_class": "angular"}]},
    {"task_no": 22, "task": "slide block over vertical surface",
     "requirement": "z translational direction activated, must apply force on x-y plane.",
     "predicates": [{"kind": "activation_count", "axis_class": "translational", "min": 2, "max": 2},
                    {"kind": "plane_force"}]},
    {"task_no": 23, "task": "turn steering wheel",
     "requirement": "same as Task 6.",
     "same_as": [6]},
    {"task_no": 24, "task": "shake cocktail bottle",
     "requirement": "angular direction activated, position control.",
     "predicates": [{"kind": "activation_count", "axis_class": "angular", "min": 1, "max": 1},
                    {"kind": "mode_required", "axis_class": "angular", "mode": "position_velocity"}]},
    {"task_no": 25, "task": "cut banana",
     "requirement": "same as Task 1.",
     "same_as": [1]},
    {"task_no": 26, "task": "crack egg",
     "requirement": "same as Task 20.",
     "same_as": [20]},
    {"task_no": 27, "task": "press button",
     "requirement": "same as Task 3.",
     "same_as": [3]},
    {"task_no": 28, "task": "insert GPU into socket",
     "requirement": "same as Task 3.",
     "same_as": [3]},
    {"task_no": 29, "task": "open bottle",
     "requirement": "same as Task 4.",
     "same_as": [4]},
    {"task_no": 30, "task": "open childproof bottle",
     "requirement": "add downside force versus Task 29.",
     "same_as": [29],
     "predicates": [{"kind": "added_force_vs", "reference": 29}]}
  ]
}
)json";

constexpr int kTaskCount = 30;

struct RawRule {
  int task_no = 0;
  std::string task;
  std::string requirement;
  std::vector<int> same_as;
  std::vector<Predicate> own;
};

[[noreturn]] void invalid(const std::string& message) {
  raise(ErrorCode::RuleFileInvalid, message);
}

AxisClass parse_axis_class(const json& record, const char* where) {
  std::string name = record.value("axis_class", "");
  if (name == "translational") return AxisClass::Translational;
  if (name == "angular") return AxisClass::Angular;
  invalid(std::string(where) + ": axis_class must be translational or angular");
}

int parse_reference(const json& record, const char* where) {
  if (!record.contains("reference") || !record["reference"].is_number_integer()) {
    invalid(std::string(where) + ": missing reference task number");
  }
  int reference = record["reference"].get<int>();
  if (reference < 1 || reference > kTaskCount) {
    invalid(std::string(where) + ": reference out of range");
  }
  return reference;
}

Predicate parse_predicate(const json& record) {
  if (!record.is_object() || !record.contains("kind")) {
    invalid("predicate must be an object with a kind");
  }
  std::string kind = record["kind"].get<std::string>();
  Predicate p;
  if (kind == "activation_count") {
    p.kind = Predicate::Kind::ActivationCount;
    p.axis_class = parse_axis_class(record, "activation_count");
    if (!record.contains("min") || !record.contains("max")) {
      invalid("activation_count needs min and max");
    }
    p.min = record["min"].get<int>();
    p.max = record["max"].get<int>();
    if (p.min < 0 || p.max < p.min || p.max > 3) {
      invalid("activation_count bounds must satisfy 0 <= min <= max <= 3");
    }
  } else if (kind == "only_axis_active") {
    p.kind = Predicate::Kind::OnlyAxisActive;
    p.axis_class = parse_axis_class(record, "only_axis_active");
  } else if (kind == "mode_required") {
    p.kind = Predicate::Kind::ModeRequired;
    p.axis_class = parse_axis_class(record, "mode_required");
    std::string mode = record.value("mode", "");
    if (mode == "force") {
      p.mode = ControlMode::Force;
    } else if (mode == "position_velocity") {
      p.mode = ControlMode::PositionVelocity;
    } else {
      invalid("mode_required mode must be force or position_velocity");
    }
  } else if (kind == "plane_force") {
    p.kind = Predicate::Kind::PlaneForce;
    p.axis_class = AxisClass::Translational;
  } else if (kind == "opposite_of") {
    p.kind = Predicate::Kind::OppositeOf;
    p.axis_class = parse_axis_class(record, "opposite_of");
    p.reference = parse_reference(record, "opposite_of");
  } else if (kind == "added_force_vs") {
    p.kind = Predicate::Kind::AddedForceVs;
    p.axis_class = AxisClass::Translational;
    p.reference = parse_reference(record, "added_force_vs");
  } else {
    invalid("unknown predicate kind " + kind);
  }
  return p;
}

std::map<int, RawRule> parse_raw_rules(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    invalid(std::string("rule file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array()) {
    invalid("rule file must be an object with a rules array");
  }

  std::map<int, RawRule> raw;
  for (const json& record : doc["rules"]) {
    if (!record.is_object() || !record.contains("task_no") ||
        !record["task_no"].is_number_integer()) {
      invalid("every rule needs an integer task_no");
    }
    RawRule rule;
    rule.task_no = record["task_no"].get<int>();
    if (rule.task_no < 1 || rule.task_no > kTaskCount) {
      invalid("task_no " + std::to_string(rule.task_no) + " out of range 1.." +
              std::to_string(kTaskCount));
    }
    if (raw.count(rule.task_no)) {
      invalid("duplicate task_no " + std::to_string(rule.task_no));
    }
    rule.task = record.value("task", "");
    rule.requirement = record.value("requirement", "");
    if (rule.task.empty() || rule.requirement.empty()) {
      invalid("task " + std::to_string(rule.task_no) +
              " needs task and requirement text");
    }
    if (record.contains("same_as")) {
      if (!record["same_as"].is_array()) invalid("same_as must be an array");
      for (const json& ref : record["same_as"]) {
        int value = ref.get<int>();
        if (value < 1 || value > kTaskCount) {
          invalid("same_as reference out of range in task " +
                  std::to_string(rule.task_no));
        }
        rule.same_as.push_back(value);
      }
    }
    if (record.contains("predicates")) {
      if (!record["predicates"].is_array()) invalid("predicates must be an array");
      for (const json& p : record["predicates"]) {
        rule.own.push_back(parse_predicate(p));
      }
    }
    if (rule.same_as.empty() && rule.own.empty()) {
      invalid("task " + std::to_string(rule.task_no) +
              " has neither predicates nor same_as");
    }
    raw.emplace(rule.task_no, std::move(rule));
  }
  if (raw.size() != static_cast<size_t>(kTaskCount)) {
    invalid("expected " + std::to_string(kTaskCount) + " rules, got " +
            std::to_string(raw.size()));
  }
  return raw;
}

class Expander {
 public:
  explicit Expander(const std::map<int, RawRule>& raw) : raw_(raw) {}

  const std::vector<std::vector<Predicate>>& expand(int task_no) {
    auto done = expanded_.find(task_no);
    if (done != expanded_.end()) return done->second;
    if (visiting_.count(task_no)) {
      raise(ErrorCode::AliasCycle,
            "alias cycle through task " + std::to_string(task_no));
    }
    visiting_.insert(task_no);

    const RawRule& rule = raw_.at(task_no);
    std::vector<std::vector<Predicate>> alternatives;
    if (rule.same_as.empty()) {
      alternatives.push_back(rule.own);
    } else {
      for (int ref : rule.same_as) {
        if (!raw_.count(ref)) {
          invalid("task " + std::to_string(task_no) +
                  " aliases missing task " + std::to_string(ref));
        }
        for (const auto& inherited : expand(ref)) {
          std::vector<Predicate> alternative = inherited;
          alternative.insert(alternative.end(), rule.own.begin(), rule.own.end());
          alternatives.push_back(std::move(alternative));
        }
      }
    }

    visiting_.erase(task_no);
    return expanded_.emplace(task_no, std::move(alternatives)).first->second;
  }

 private:
  const std::map<int, RawRule>& raw_;
  std::map<int, std::vector<std::vector<Predicate>>> expanded_;
  std::set<int> visiting_;
};

struct AlternativeResult {
  std::vector<std::string> failed;
  std::vector<std::string> notes;
};

int active_count_in_class(const TaskFrameSpec& spec, AxisClass axis_class) {
  int count = 0;
  for (const AxisDirective& d : spec.directives()) {
    if (d.active() && axis_in_class(d.axis, axis_class)) ++count;
  }
  return count;
}

int force_translational_count(const TaskFrameSpec& spec) {
  int count = 0;
  for (const AxisDirective& d : spec.directives()) {
    if (d.mode == ControlMode::Force && is_translational(d.axis)) ++count;
  }
  return count;
}

// The single active directive in the class, or nullptr when there is not
// exactly one.
const AxisDirective* single_active(const TaskFrameSpec& spec, AxisClass axis_class) {
  const AxisDirective* found = nullptr;
  for (const AxisDirective& d : spec.directives()) {
    if (!d.active() || !axis_in_class(d.axis, axis_class)) continue;
    if (found) return nullptr;
    found = &d;
  }
  return found;
}

void eval_predicate(const Predicate& p, const TaskFrameSpec& spec,
                    const std::map<int, TaskFrameSpec>& context,
                    AlternativeResult& result) {
  switch (p.kind) {
    case Predicate::Kind::ActivationCount: {
      int n = active_count_in_class(spec, p.axis_class);
      if (n < p.min || n > p.max) result.failed.push_back(p.label());
      return;
    }
    case Predicate::Kind::OnlyAxisActive: {
      const bool pass = spec.active_count() == 1 &&
                        single_active(spec, p.axis_class) != nullptr;
      if (!pass) result.failed.push_back(p.label());
      return;
    }
    case Predicate::Kind::ModeRequired: {
      for (const AxisDirective& d : spec.directives()) {
        if (d.active() && axis_in_class(d.axis, p.axis_class) && d.mode != p.mode) {
          result.failed.push_back(p.label());
          return;
        }
      }
      return;
    }
    case Predicate::Kind::PlaneForce: {
      if (force_translational_count(spec) == 0) result.failed.push_back(p.label());
      return;
    }
    case Predicate::Kind::OppositeOf: {
      auto ref = context.find(p.reference);
      if (ref == context.end()) {
        result.notes.push_back("task " + std::to_string(p.reference) +
                               " not in context, opposite-sign comparison skipped");
        return;
      }
      const AxisDirective* mine = single_active(spec, p.axis_class);
      const AxisDirective* theirs = single_active(ref->second, p.axis_class);
      if (!mine || !theirs || mine->value * theirs->value >= 0) {
        result.failed.push_back(p.label());
      }
      return;
    }
    case Predicate::Kind::AddedForceVs: {
      auto ref = context.find(p.reference);
      if (ref == context.end()) {
        result.notes.push_back("task " + std::to_string(p.reference) +
                               " not in context, added-force comparison skipped");
        return;
      }
      if (force_translational_count(spec) <= force_translational_count(ref->second)) {
        result.failed.push_back(p.label());
      }
      return;
    }
  }
}

std::string join_notes(const std::vector<std::string>& notes) {
  std::string out;
  for (const std::string& note : notes) {
    if (!out.empty()) out += "; ";
    out += note;
  }
  return out;
}

}  // namespace

std::string_view axis_class_name(AxisClass axis_class) {
  return axis_class == AxisClass::Translational ? "translational" : "angular";
}

bool axis_in_class(Axis axis, AxisClass axis_class) {
  return axis_class == AxisClass::Translational ? is_translational(axis)
                                                : is_angular(axis);
}

std::string Predicate::label() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::ActivationCount:
      out << "activation_count(" << axis_class_name(axis_class) << ", " << min
          << ".." << max << ")";
      break;
    case Kind::OnlyAxisActive:
      out << "only_axis_active(" << axis_class_name(axis_class) << ")";
      break;
    case Kind::ModeRequired:
      out << "mode_required(" << axis_class_name(axis_class) << ", "
          << control_mode_name(mode) << ")";
      break;
    case Kind::PlaneForce:
      out << "plane_force(translational)";
      break;
    case Kind::OppositeOf:
      out << "opposite_of(task " << reference << ", " << axis_class_name(axis_class)
          << ")";
      break;
    case Kind::AddedForceVs:
      out << "added_force_vs(task " << reference << ")";
      break;
  }
  return out.str();
}

std::string canonical_rules_json_text() { return kCanonicalRulesJson; }

const RuleSet& RuleSet::builtin() {
  static const RuleSet rules = RuleSet::from_json_text(kCanonicalRulesJson);
  return rules;
}

RuleSet RuleSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open rule file " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

RuleSet RuleSet::from_json_text(std::string_view text) {
  std::map<int, RawRule> raw = parse_raw_rules(text);
  Expander expander(raw);

  RuleSet set;
  set.rules_.reserve(raw.size());
  for (const auto& [task_no, rule] : raw) {
    MetricRule expanded;
    expanded.task_no = task_no;
    expanded.task = rule.task;
    expanded.requirement = rule.requirement;
    expanded.alternatives = expander.expand(task_no);
    set.rules_.push_back(std::move(expanded));
  }
  return set;
}

const MetricRule& RuleSet::rule(int task_no) const {
  if (task_no < 1 || task_no > static_cast<int>(rules_.size())) {
    raise(ErrorCode::RuleNotFound, "no rule for task " + std::to_string(task_no));
  }
  return rules_[static_cast<size_t>(task_no - 1)];
}

Verdict validate(const TaskFrameSpec& spec, const MetricRule& rule,
                 const std::map<int, TaskFrameSpec>& context,
                 const SafetyEnvelope& envelope) {
  if (rule.alternatives.empty()) {
    raise(ErrorCode::RuleNotFound,
          "rule for task " + std::to_string(rule.task_no) + " has no predicates");
  }

  std::vector<AlternativeResult> results;
  results.reserve(rule.alternatives.size());
  for (const auto& alternative : rule.alternatives) {
    AlternativeResult result;
    for (const Predicate& p : alternative) {
      eval_predicate(p, spec, context, result);
    }
    results.push_back(std::move(result));
  }

  Verdict verdict;
  verdict.safety_violations = safety_check(spec, envelope);

  auto pass = std::find_if(results.begin(), results.end(),
                           [](const AlternativeResult& r) { return r.failed.empty(); });
  if (pass != results.end()) {
    verdict.correct = true;
    verdict.notes = join_notes(pass->notes);
    return verdict;
  }

  auto best = std::min_element(results.begin(), results.end(),
                               [](const AlternativeResult& a, const AlternativeResult& b) {
                                 return a.failed.size() < b.failed.size();
                               });
  verdict.correct = false;
  verdict.failed_predicates = best->failed;
  std::vector<std::string> notes = best->notes;
  if (rule.alternatives.size() > 1) {
    notes.insert(notes.begin(),
                 "none of " + std::to_string(rule.alternatives.size()) +
                     " alternatives satisfied");
  }
  verdict.notes = join_notes(notes);
  return verdict;
}

std::vector<SafetyViolation> safety_check(const TaskFrameSpec& spec,
                                          const SafetyEnvelope& envelope) {
  if (envelope.max_force_n <= 0 || envelope.max_torque_nm <= 0 ||
      envelope.max_angular_rate_rad_s <= 0 || envelope.max_linear_rate_cm_s <= 0) {
    raise(ErrorCode::InvalidArgument, "safety envelope bounds must be positive");
  }

  std::vector<SafetyViolation> violations;
  for (const AxisDirective& d : spec.directives()) {
    if (!d.active()) continue;
    double bound = 0;
    std::string limit;
    switch (d.unit) {
      case Unit::Newton:
        bound = envelope.max_force_n;
        limit = "max_force_n";
        break;
      case Unit::NewtonMeter:
        bound = envelope.max_torque_nm;
        limit = "max_torque_nm";
        break;
      case Unit::CmPerSec:
        bound = envelope.max_linear_rate_cm_s;
        limit = "max_linear_rate_cm_s";
        break;
      case Unit::RadPerSec:
        bound = envelope.max_angular_rate_rad_s;
        limit = "max_angular_rate_rad_s";
        break;
      default:
        continue;  // displacement set-points have no envelope bound
    }
    if (std::abs(d.value) > bound) {
      violations.push_back(SafetyViolation{d.axis, d.value, bound, limit});
    }
  }
  return violations;
}

}  // namespace tff
