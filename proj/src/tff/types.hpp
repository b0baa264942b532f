#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tff/errors.hpp"

namespace tff {

// The six task-frame directions, in the fixed prompt order.
enum class Axis { TX = 0, TY, TZ, RX, RY, RZ };

inline constexpr std::array<Axis, 6> kAllAxes = {Axis::TX, Axis::TY, Axis::TZ,
                                                 Axis::RX, Axis::RY, Axis::RZ};

bool is_translational(Axis axis);
bool is_angular(Axis axis);

// Parameter name used in the function grammar, e.g. "translational_x".
std::string_view axis_param_name(Axis axis);
std::optional<Axis> axis_from_param_name(std::string_view name);

enum class ControlMode { Inactive, Force, PositionVelocity };

std::string_view control_mode_name(ControlMode mode);

// Unit tags carried by active directives. Rate vs displacement is preserved
// so the simulator can tell velocity set-points from position set-points.
enum class Unit {
  None,          // inactive axes only
  Newton,        // N   (translational force)
  NewtonMeter,   // Nm  (angular torque)
  Centimeter,    // cm  (translational displacement)
  CmPerSec,      // cm/sec (translational rate)
  Radian,        // rad (angular displacement)
  RadPerSec,     // rad/sec (angular rate)
};

// Canonical token as rendered in prompts ("N", "cm/sec", ...).
std::string_view unit_token(Unit unit);
// Accepts canonical tokens plus the "cm/s"/"rad/s" aliases, case-insensitive,
// surrounding whitespace ignored. Does not check axis compatibility.
std::optional<Unit> parse_unit_token(std::string_view token);

ControlMode mode_for_unit(Unit unit);
bool unit_allowed_on_axis(Unit unit, Axis axis);
bool is_rate_unit(Unit unit);

// One axis of a task-frame specification.
struct AxisDirective {
  Axis axis = Axis::TX;
  ControlMode mode = ControlMode::Inactive;
  double value = 0.0;
  Unit unit = Unit::None;

  bool active() const { return mode != ControlMode::Inactive; }

  bool operator==(const AxisDirective&) const = default;
};

// Validating constructors. Throw Error(InvalidSpec) on a mode/value/unit
// combination that breaks the directive invariants.
AxisDirective make_inactive_directive(Axis axis);
AxisDirective make_directive(Axis axis, double value, Unit unit);

// The coordinate-setting comment plus a best-effort map of axis letters to
// the phrases that mention them. Hints are derived from raw_text only, so
// they survive a render/parse round trip.
struct CoordinateSetting {
  std::string raw_text;
  std::map<Axis, std::string> axis_hints;

  bool operator==(const CoordinateSetting&) const = default;
};

CoordinateSetting make_coordinate_setting(std::string raw_text);

// A task name in raw and normalized form. normalized always matches
// [a-z0-9]+(_[a-z0-9]+)*.
struct TaskName {
  std::string raw;
  std::string normalized;

  // normalized with underscores as spaces, for prose contexts.
  std::string display() const;

  bool operator==(const TaskName&) const = default;
};

// Lowercases, splits on non-alphanumeric runs, drops the stop words
// {a, an, the}, joins with underscores. Throws Error(EmptyName) when nothing
// remains.
TaskName normalize_task_name(std::string_view raw);

struct Provenance {
  enum class Kind { Authored, Generated };

  Kind kind = Kind::Authored;
  std::string model_id;  // Generated only
  int shots = 0;         // Generated only

  static Provenance authored() { return {}; }
  static Provenance generated(std::string model_id, int shots) {
    return {Kind::Generated, std::move(model_id), shots};
  }

  bool operator==(const Provenance&) const = default;
};

// One primitive task's full specification: coordinate-setting text plus one
// directive per axis, in the fixed TX,TY,TZ,RX,RY,RZ order.
class TaskFrameSpec {
 public:
  // Validates every directive invariant and the one-directive-per-axis rule.
  // `directives` may arrive in any order; they are stored in axis order.
  static TaskFrameSpec create(TaskName task, CoordinateSetting coordinates,
                              const std::vector<AxisDirective>& directives,
                              Provenance provenance = Provenance::authored());

  const TaskName& task() const { return task_; }
  const CoordinateSetting& coordinates() const { return coordinates_; }
  const std::array<AxisDirective, 6>& directives() const { return directives_; }
  const AxisDirective& directive(Axis axis) const;
  const Provenance& provenance() const { return provenance_; }

  int active_count() const;

  TaskFrameSpec with_provenance(Provenance provenance) const;

  bool operator==(const TaskFrameSpec&) const = default;

 private:
  TaskFrameSpec() = default;

  TaskName task_;
  CoordinateSetting coordinates_;
  std::array<AxisDirective, 6> directives_{};
  Provenance provenance_;
};

// Role of a function block inside a prompt.
struct FunctionRole {
  enum class Kind { Source, Target };

  Kind kind = Kind::Target;
  int source_index = 0;  // 1-based, Source only

  static FunctionRole source(int index) { return {Kind::Source, index}; }
  static FunctionRole target() { return {Kind::Target, 0}; }
};

// Set-point values as rendered in prompts: up to six significant digits, no
// thousands separators, sign attached.
std::string format_number(double value);

// Renders a function block in the prompt grammar. Source blocks carry the
// full body; the target block is the role comment plus the def header only.
std::string render_function(const TaskFrameSpec& spec, FunctionRole role);

}  // namespace tff
