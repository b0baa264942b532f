#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tff/types.hpp"

namespace tff {

enum class AxisClass { Translational, Angular };

std::string_view axis_class_name(AxisClass axis_class);
bool axis_in_class(Axis axis, AxisClass axis_class);

// One checkable condition over a spec. Predicates are scoped to an axis
// class, never to a specific axis letter, which makes every rule invariant
// under relabeling of the translational (or angular) axes.
struct Predicate {
  enum class Kind {
    ActivationCount,  // min..max active directives in axis_class
    OnlyAxisActive,   // exactly one active directive overall, in axis_class
    ModeRequired,     // every active directive in axis_class uses `mode`
    PlaneForce,       // some translational directive is force-controlled
    OppositeOf,       // single active value in axis_class has the opposite
                      // sign of the reference task's
    AddedForceVs,     // more force-mode translational directives than the
                      // reference task
  };

  Kind kind = Kind::ActivationCount;
  AxisClass axis_class = AxisClass::Translational;
  int min = 0;                               // ActivationCount
  int max = 0;                               // ActivationCount
  ControlMode mode = ControlMode::Inactive;  // ModeRequired
  int reference = 0;                         // OppositeOf, AddedForceVs

  std::string label() const;
};

// One task's requirement after alias expansion. A spec is correct when all
// predicates of at least one alternative hold ("same as Task 2 or Task 9"
// keeps both readings as separate alternatives).
struct MetricRule {
  int task_no = 0;
  std::string task;         // display name, e.g. "cut pizza"
  std::string requirement;  // requirement prose
  std::vector<std::vector<Predicate>> alternatives;
};

struct SafetyEnvelope {
  double max_force_n = 50.0;
  double max_torque_nm = 5.0;
  double max_angular_rate_rad_s = 10.0;
  double max_linear_rate_cm_s = 50.0;
};

struct SafetyViolation {
  Axis axis = Axis::TX;
  double value = 0.0;
  double bound = 0.0;
  std::string limit;  // which envelope bound tripped, e.g. "max_force_n"

  bool operator==(const SafetyViolation&) const = default;
};

struct Verdict {
  bool correct = false;
  std::vector<std::string> failed_predicates;  // labels, empty iff correct
  std::vector<SafetyViolation> safety_violations;
  std::string notes;

  bool operator==(const Verdict&) const = default;
};

// The 30-task requirement catalog. Loadable from the fixture file; builtin()
// carries the identical canonical data compiled in.
class RuleSet {
 public:
  static const RuleSet& builtin();
  // Expects the fixture schema (see canonical_rules_json_text). Throws
  // RuleFileInvalid on structural problems, AliasCycle on circular aliases.
  static RuleSet load(const std::string& path);
  static RuleSet from_json_text(std::string_view text);

  const MetricRule& rule(int task_no) const;  // throws RuleNotFound
  const std::vector<MetricRule>& rules() const { return rules_; }

 private:
  std::vector<MetricRule> rules_;  // sorted by task_no, exactly 1..30
};

// The canonical rule fixture content, pre-expansion (aliases intact).
std::string canonical_rules_json_text();

// Evaluates a rule against a spec. `context` maps task numbers to specs from
// the same run; relational predicates whose reference is absent degrade to a
// pass plus a note. Safety violations are reported in the verdict but never
// affect correctness.
Verdict validate(const TaskFrameSpec& spec, const MetricRule& rule,
                 const std::map<int, TaskFrameSpec>& context = {},
                 const SafetyEnvelope& envelope = SafetyEnvelope{});

// Compares each active directive against the envelope bound for its unit
// class. Bounds are inclusive: |value| must exceed the bound to violate.
// Displacement units (cm, rad) have no bound. Throws InvalidArgument on a
// non-positive bound.
std::vector<SafetyViolation> safety_check(const TaskFrameSpec& spec,
                                          const SafetyEnvelope& envelope);

}  // namespace tff
