#include "tff/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace tff {

namespace {

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view text) {
  const auto* ws = " \t\r\n";
  auto begin = text.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(ws);
  return text.substr(begin, end - begin + 1);
}

}  // namespace

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Ok: return "ok";
    case ErrorCode::EmptyName: return "empty_name";
    case ErrorCode::InvalidSpec: return "invalid_spec";
    case ErrorCode::ShotCountOutOfRange: return "shot_count_out_of_range";
    case ErrorCode::UnknownUnit: return "unknown_unit";
    case ErrorCode::RuleNotFound: return "rule_not_found";
    case ErrorCode::RuleFileInvalid: return "rule_file_invalid";
    case ErrorCode::AliasCycle: return "alias_cycle";
    case ErrorCode::NetworkError: return "network_error";
    case ErrorCode::AuthError: return "auth_error";
    case ErrorCode::RateLimited: return "rate_limited";
    case ErrorCode::FixtureMiss: return "fixture_miss";
    case ErrorCode::UnstableSimulation: return "unstable_simulation";
    case ErrorCode::TraceTooShort: return "trace_too_short";
    case ErrorCode::SafetyViolation: return "safety_violation";
    case ErrorCode::IoError: return "io_error";
    case ErrorCode::SchemaMismatch: return "schema_mismatch";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

bool is_translational(Axis axis) {
  return axis == Axis::TX || axis == Axis::TY || axis == Axis::TZ;
}

bool is_angular(Axis axis) { return !is_translational(axis); }

std::string_view axis_param_name(Axis axis) {
  switch (axis) {
    case Axis::TX: return "translational_x";
    case Axis::TY: return "translational_y";
    case Axis::TZ: return "translational_z";
    case Axis::RX: return "angular_x";
    case Axis::RY: return "angular_y";
    case Axis::RZ: return "angular_z";
  }
  return "";
}

std::optional<Axis> axis_from_param_name(std::string_view name) {
  for (Axis axis : kAllAxes) {
    if (axis_param_name(axis) == name) return axis;
  }
  return std::nullopt;
}

std::string_view control_mode_name(ControlMode mode) {
  switch (mode) {
    case ControlMode::Inactive: return "inactive";
    case ControlMode::Force: return "force";
    case ControlMode::PositionVelocity: return "position_velocity";
  }
  return "";
}

std::string_view unit_token(Unit unit) {
  switch (unit) {
    case Unit::None: return "";
    case Unit::Newton: return "N";
    case Unit::NewtonMeter: return "Nm";
    case Unit::Centimeter: return "cm";
    case Unit::CmPerSec: return "cm/sec";
    case Unit::Radian: return "rad";
    case Unit::RadPerSec: return "rad/sec";
  }
  return "";
}

std::optional<Unit> parse_unit_token(std::string_view token) {
  std::string t = to_lower(trim(token));
  if (t == "n") return Unit::Newton;
  if (t == "nm") return Unit::NewtonMeter;
  if (t == "cm") return Unit::Centimeter;
  if (t == "cm/sec" || t == "cm/s") return Unit::CmPerSec;
  if (t == "rad") return Unit::Radian;
  if (t == "rad/sec" || t == "rad/s") return Unit::RadPerSec;
  return std::nullopt;
}

ControlMode mode_for_unit(Unit unit) {
  switch (unit) {
    case Unit::None:
      return ControlMode::Inactive;
    case Unit::Newton:
    case Unit::NewtonMeter:
      return ControlMode::Force;
    default:
      return ControlMode::PositionVelocity;
  }
}

bool unit_allowed_on_axis(Unit unit, Axis axis) {
  switch (unit) {
    case Unit::None:
      return true;
    case Unit::Newton:
    case Unit::Centimeter:
    case Unit::CmPerSec:
      return is_translational(axis);
    case Unit::NewtonMeter:
    case Unit::Radian:
    case Unit::RadPerSec:
      return is_angular(axis);
  }
  return false;
}

bool is_rate_unit(Unit unit) {
  return unit == Unit::CmPerSec || unit == Unit::RadPerSec;
}

AxisDirective make_inactive_directive(Axis axis) {
  return AxisDirective{axis, ControlMode::Inactive, 0.0, Unit::None};
}

AxisDirective make_directive(Axis axis, double value, Unit unit) {
  if (unit == Unit::None) {
    if (value != 0.0) {
      raise(ErrorCode::InvalidSpec,
            std::string("directive without a unit must be 0 on ") +
                std::string(axis_param_name(axis)));
    }
    return make_inactive_directive(axis);
  }
  if (!std::isfinite(value) || value == 0.0) {
    raise(ErrorCode::InvalidSpec,
          std::string("active directive needs a finite non-zero value on ") +
              std::string(axis_param_name(axis)));
  }
  if (!unit_allowed_on_axis(unit, axis)) {
    raise(ErrorCode::InvalidSpec,
          std::string(unit_token(unit)) + " is not a valid unit for " +
              std::string(axis_param_name(axis)));
  }
  return AxisDirective{axis, mode_for_unit(unit), value, unit};
}

CoordinateSetting make_coordinate_setting(std::string raw_text) {
  CoordinateSetting setting;
  setting.raw_text = std::move(raw_text);

  // Best-effort hints: for each clause, map the first "<x|y|z> axis" or
  // "<x|y|z>-axis" mention to the clause text.
  std::string_view rest = setting.raw_text;
  while (!rest.empty()) {
    auto cut = rest.find_first_of(";,");
    std::string_view clause = trim(rest.substr(0, cut));
    rest = cut == std::string_view::npos ? std::string_view{} : rest.substr(cut + 1);
    if (clause.empty()) continue;
    std::string lower = to_lower(clause);
    for (char letter : {'x', 'y', 'z'}) {
      std::string pattern1 = std::string(1, letter) + " axis";
      std::string pattern2 = std::string(1, letter) + "-axis";
      auto pos = lower.find(pattern1);
      if (pos == std::string::npos) pos = lower.find(pattern2);
      if (pos == std::string::npos) continue;
      // Require a word boundary before the letter.
      if (pos > 0 && std::isalnum(static_cast<unsigned char>(lower[pos - 1]))) continue;
      Axis axis = letter == 'x' ? Axis::TX : letter == 'y' ? Axis::TY : Axis::TZ;
      if (!setting.axis_hints.count(axis)) {
        setting.axis_hints[axis] = std::string(clause);
      }
      break;
    }
  }
  return setting;
}

std::string TaskName::display() const {
  std::string out = normalized;
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

TaskName normalize_task_name(std::string_view raw) {
  static const std::array<std::string_view, 3> kStopWords = {"a", "an", "the"};

  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    bool stop = std::find(kStopWords.begin(), kStopWords.end(), current) !=
                kStopWords.end();
    if (!stop) tokens.push_back(current);
    current.clear();
  };
  for (char c : raw) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();

  if (tokens.empty()) {
    raise(ErrorCode::EmptyName,
          "no task name left after normalization: \"" + std::string(raw) + "\"");
  }

  std::string normalized;
  for (const auto& token : tokens) {
    if (!normalized.empty()) normalized.push_back('_');
    normalized += token;
  }
  return TaskName{std::string(raw), std::move(normalized)};
}

TaskFrameSpec TaskFrameSpec::create(TaskName task, CoordinateSetting coordinates,
                                    const std::vector<AxisDirective>& directives,
                                    Provenance provenance) {
  TaskFrameSpec spec;
  spec.task_ = std::move(task);
  spec.coordinates_ = std::move(coordinates);
  spec.provenance_ = std::move(provenance);

  std::array<bool, 6> seen{};
  for (Axis axis : kAllAxes) {
    spec.directives_[static_cast<size_t>(axis)] = make_inactive_directive(axis);
  }
  for (const AxisDirective& directive : directives) {
    auto index = static_cast<size_t>(directive.axis);
    if (seen[index]) {
      raise(ErrorCode::InvalidSpec,
            std::string("duplicate directive for ") +
                std::string(axis_param_name(directive.axis)));
    }
    seen[index] = true;
    // Re-run the factory so externally assembled directives are checked too.
    spec.directives_[index] =
        directive.active() ? make_directive(directive.axis, directive.value, directive.unit)
                           : make_inactive_directive(directive.axis);
  }
  return spec;
}

const AxisDirective& TaskFrameSpec::directive(Axis axis) const {
  return directives_[static_cast<size_t>(axis)];
}

int TaskFrameSpec::active_count() const {
  return static_cast<int>(
      std::count_if(directives_.begin(), directives_.end(),
                    [](const AxisDirective& d) { return d.active(); }));
}

TaskFrameSpec TaskFrameSpec::with_provenance(Provenance provenance) const {
  TaskFrameSpec copy = *this;
  copy.provenance_ = std::move(provenance);
  return copy;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // also folds -0
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof(buf), value,
                              std::chars_format::general, 6);
  return std::string(buf, result.ptr);
}

std::string render_function(const TaskFrameSpec& spec, FunctionRole role) {
  std::ostringstream out;
  if (role.kind == FunctionRole::Kind::Source) {
    out << "# Source function " << role.source_index << "\n";
  } else {
    out << "# Target function\n";
  }
  out << "def " << spec.task().normalized << "(";
  for (size_t i = 0; i < kAllAxes.size(); ++i) {
    if (i > 0) out << ", ";
    out << axis_param_name(kAllAxes[i]) << "=0";
  }
  out << "):\n";
  if (role.kind == FunctionRole::Kind::Target) {
    // The target carries only the header; the body is what the model fills in.
    return out.str();
  }
  out << "  # Coordinate setting: " << spec.coordinates().raw_text << "\n";
  for (Axis axis : kAllAxes) {
    const AxisDirective& d = spec.directive(axis);
    out << "  " << axis_param_name(axis) << " = " << format_number(d.value);
    if (d.active()) {
      out << "  # " << unit_token(d.unit);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace tff
