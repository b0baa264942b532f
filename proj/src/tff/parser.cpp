#include "tff/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace tff {

namespace {

std::string_view trim(std::string_view text) {
  const auto* ws = " \t\r\n";
  auto begin = text.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(ws);
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

bool is_identifier_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// `def <name>(` with arbitrary surrounding text on the line.
bool line_defines(std::string_view line, std::string_view name) {
  auto pos = line.find("def ");
  while (pos != std::string_view::npos) {
    std::string_view rest = line.substr(pos + 4);
    rest = rest.substr(std::min(rest.find_first_not_of(" \t"), rest.size()));
    if (rest.substr(0, name.size()) == name) {
      std::string_view after = rest.substr(name.size());
      after = after.substr(std::min(after.find_first_not_of(" \t"), after.size()));
      if (!after.empty() && after.front() == '(') return true;
    }
    pos = line.find("def ", pos + 4);
  }
  return false;
}

bool line_defines_anything(std::string_view line) {
  auto pos = line.find("def ");
  if (pos == std::string_view::npos) return false;
  // Not inside a word ("undefined ...").
  return pos == 0 || !is_identifier_char(line[pos - 1]);
}

// A bare call such as `turn_screw(...)`, the shape of degenerate generations
// that only re-invoke the prompt's source functions.
bool line_is_bare_call(std::string_view line) {
  std::string_view t = trim(line);
  if (t.empty() || t.front() == '#') return false;
  size_t i = 0;
  if (!std::isalpha(static_cast<unsigned char>(t[0])) && t[0] != '_') return false;
  while (i < t.size() && is_identifier_char(t[i])) ++i;
  std::string_view head = t.substr(0, i);
  if (head == "def" || head == "return" || head == "if" || head == "for") return false;
  std::string_view rest = t.substr(i);
  rest = rest.substr(std::min(rest.find_first_not_of(" \t"), rest.size()));
  return !rest.empty() && rest.front() == '(' && rest.back() == ')';
}

bool starts_block_comment(std::string_view line) {
  std::string_view t = trim(line);
  return t.rfind("# Source function", 0) == 0 || t.rfind("# Target function", 0) == 0;
}

// Case-insensitive find of "coordinate setting" in a comment line; returns
// the remainder after the marker (and an optional colon), or nullopt.
std::optional<std::string> coordinate_comment_text(std::string_view line) {
  std::string_view t = trim(line);
  if (t.empty() || t.front() != '#') return std::nullopt;
  std::string lower(t);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  auto pos = lower.find("coordinate setting");
  if (pos == std::string::npos) return std::nullopt;
  std::string_view rest = t.substr(pos + std::string_view("coordinate setting").size());
  rest = trim(rest);
  if (!rest.empty() && rest.front() == ':') rest = trim(rest.substr(1));
  return std::string(rest);
}

struct Assignment {
  Axis axis;
  double value = 0.0;
  std::optional<std::string> unit_comment;
  bool malformed = false;
  std::string detail;
};

// `<axis_param> = <number>[  # <unit>]`, tolerant of spacing and a trailing
// comma or semicolon on the value.
std::optional<Assignment> match_assignment(std::string_view line) {
  std::string_view t = trim(line);
  size_t i = 0;
  while (i < t.size() && is_identifier_char(t[i])) ++i;
  if (i == 0) return std::nullopt;
  auto axis = axis_from_param_name(t.substr(0, i));
  if (!axis) return std::nullopt;
  std::string_view rest = t.substr(i);
  rest = rest.substr(std::min(rest.find_first_not_of(" \t"), rest.size()));
  if (rest.empty() || rest.front() != '=') return std::nullopt;
  rest = trim(rest.substr(1));

  Assignment assignment{*axis};
  std::string_view value_part = rest;
  auto hash = rest.find('#');
  if (hash != std::string_view::npos) {
    value_part = trim(rest.substr(0, hash));
    assignment.unit_comment = std::string(trim(rest.substr(hash + 1)));
  }
  while (!value_part.empty() &&
         (value_part.back() == ',' || value_part.back() == ';')) {
    value_part = trim(value_part.substr(0, value_part.size() - 1));
  }
  if (value_part.empty()) {
    assignment.malformed = true;
    assignment.detail = "missing value";
    return assignment;
  }
  // from_chars rejects a leading '+'; accept it here.
  if (value_part.front() == '+') value_part = value_part.substr(1);
  double value = 0.0;
  auto result = std::from_chars(value_part.data(), value_part.data() + value_part.size(),
                                value, std::chars_format::general);
  if (result.ec != std::errc() || result.ptr != value_part.data() + value_part.size() ||
      !std::isfinite(value)) {
    assignment.malformed = true;
    assignment.detail = "non-numeric value \"" + std::string(value_part) + "\"";
    return assignment;
  }
  assignment.value = value;
  return assignment;
}

}  // namespace

std::string_view parse_reason_name(ParseReason reason) {
  switch (reason) {
    case ParseReason::NoFunctionBody: return "no_function_body";
    case ParseReason::RepeatedSourceCalls: return "repeated_source_calls";
    case ParseReason::UnknownUnit: return "unknown_unit";
    case ParseReason::MalformedAssignment: return "malformed_assignment";
    case ParseReason::MissingCoordinateComment: return "missing_coordinate_comment";
    case ParseReason::AxisMissing: return "axis_missing";
  }
  return "";
}

std::optional<ParseReason> parse_reason_from_name(std::string_view name) {
  static constexpr std::array<ParseReason, 6> kReasons = {
      ParseReason::NoFunctionBody,     ParseReason::RepeatedSourceCalls,
      ParseReason::UnknownUnit,        ParseReason::MalformedAssignment,
      ParseReason::MissingCoordinateComment, ParseReason::AxisMissing};
  for (ParseReason reason : kReasons) {
    if (parse_reason_name(reason) == name) return reason;
  }
  return std::nullopt;
}

std::optional<ControlMode> classify_unit(std::string_view unit_token, Axis axis) {
  auto unit = parse_unit_token(unit_token);
  if (!unit || !unit_allowed_on_axis(*unit, axis)) return std::nullopt;
  return mode_for_unit(*unit);
}

ParseOutcome parse_generation(std::string_view text, const TaskName& target) {
  std::vector<std::string_view> lines = split_lines(text);

  // Locate the target's def line. Extras beyond the first only warn.
  std::vector<size_t> candidates;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (line_defines(lines[i], target.normalized)) candidates.push_back(i);
  }

  std::vector<std::string> warnings;
  if (candidates.empty()) {
    bool any_def = std::any_of(lines.begin(), lines.end(), line_defines_anything);
    bool any_call = std::any_of(lines.begin(), lines.end(), line_is_bare_call);
    if (!any_def && any_call) {
      return ParseOutcome::rejected(ParseReason::RepeatedSourceCalls);
    }
    return ParseOutcome::rejected(ParseReason::NoFunctionBody);
  }
  if (candidates.size() > 1) {
    warnings.push_back("multiple blocks define " + target.normalized +
                       "; using the first");
  }

  std::optional<std::string> coordinate_text;
  std::array<std::optional<Assignment>, 6> assignments;
  int present = 0;

  for (size_t i = candidates.front() + 1; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line_defines_anything(line) || starts_block_comment(line) ||
        trim(line).rfind("```", 0) == 0) {
      break;
    }
    if (auto coord = coordinate_comment_text(line)) {
      if (!coordinate_text) {
        coordinate_text = std::move(*coord);
      }
      continue;
    }
    if (auto assignment = match_assignment(line)) {
      if (assignment->malformed) {
        warnings.push_back(std::string(axis_param_name(assignment->axis)) + ": " +
                           assignment->detail);
        return ParseOutcome::rejected(ParseReason::MalformedAssignment,
                                      std::move(warnings));
      }
      auto index = static_cast<size_t>(assignment->axis);
      if (assignments[index]) {
        warnings.push_back(std::string("duplicate assignment to ") +
                           std::string(axis_param_name(assignment->axis)) +
                           "; keeping the first");
        continue;
      }
      assignments[index] = std::move(*assignment);
      ++present;
    }
    // Anything else (prose, blank lines, unrelated comments) is skipped.
  }

  if (!coordinate_text || coordinate_text->empty()) {
    return ParseOutcome::rejected(ParseReason::MissingCoordinateComment,
                                  std::move(warnings));
  }
  if (present < 4) {
    return ParseOutcome::rejected(ParseReason::AxisMissing, std::move(warnings));
  }

  std::vector<AxisDirective> directives;
  for (Axis axis : kAllAxes) {
    const auto& assignment = assignments[static_cast<size_t>(axis)];
    if (!assignment) {
      warnings.push_back(std::string("axis line missing, defaulting to inactive: ") +
                         std::string(axis_param_name(axis)));
      directives.push_back(make_inactive_directive(axis));
      continue;
    }
    if (!assignment->unit_comment) {
      if (assignment->value != 0.0) {
        warnings.push_back(std::string(axis_param_name(axis)) +
                           ": non-zero value without a unit comment");
        return ParseOutcome::rejected(ParseReason::MalformedAssignment,
                                      std::move(warnings));
      }
      directives.push_back(make_inactive_directive(axis));
      continue;
    }
    auto unit = parse_unit_token(*assignment->unit_comment);
    if (!unit || !unit_allowed_on_axis(*unit, axis)) {
      warnings.push_back(std::string(axis_param_name(axis)) + ": unknown unit \"" +
                         *assignment->unit_comment + "\"");
      return ParseOutcome::rejected(ParseReason::UnknownUnit, std::move(warnings));
    }
    if (assignment->value == 0.0) {
      // "assign 0" means inactive; a stray unit comment is noise, not an error.
      warnings.push_back(std::string(axis_param_name(axis)) +
                         ": zero value with a unit comment, treated as inactive");
      directives.push_back(make_inactive_directive(axis));
      continue;
    }
    directives.push_back(make_directive(axis, assignment->value, *unit));
  }

  TaskFrameSpec spec =
      TaskFrameSpec::create(target, make_coordinate_setting(*coordinate_text),
                            directives, Provenance::generated("", 0));
  return ParseOutcome{std::move(spec), std::nullopt, std::move(warnings)};
}

}  // namespace tff
