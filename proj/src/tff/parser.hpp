#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tff/types.hpp"

namespace tff {

enum class ParseReason {
  NoFunctionBody,
  RepeatedSourceCalls,
  UnknownUnit,
  MalformedAssignment,
  MissingCoordinateComment,
  AxisMissing,
};

std::string_view parse_reason_name(ParseReason reason);
std::optional<ParseReason> parse_reason_from_name(std::string_view name);

// Result of parsing one raw completion. Either a spec that satisfies every
// TaskFrameSpec invariant, or a rejection reason; warnings in both cases.
struct ParseOutcome {
  std::optional<TaskFrameSpec> spec;
  std::optional<ParseReason> reason;
  std::vector<std::string> warnings;

  bool ok() const { return spec.has_value(); }

  static ParseOutcome rejected(ParseReason why, std::vector<std::string> warnings = {}) {
    return ParseOutcome{std::nullopt, why, std::move(warnings)};
  }

  bool operator==(const ParseOutcome&) const = default;
};

// Maps a unit comment token onto a control mode for the given axis.
// nullopt covers both unknown tokens and axis-class mismatches (e.g. "N" on
// an angular axis).
std::optional<ControlMode> classify_unit(std::string_view unit_token, Axis axis);

// Parses raw LLM completion text into a TaskFrameSpec for `target`.
//
// Total over arbitrary byte strings; never throws. Locates the first
// `def <target>(` block (parameter list ignored), reads the coordinate
// comment and the six assignment lines, and classifies units into control
// modes. Up to two absent axis lines default to inactive with a warning;
// fewer than four present lines reject with AxisMissing. Text with no target
// definition rejects as RepeatedSourceCalls when it consists of bare calls,
// NoFunctionBody otherwise.
//
// The text carries no provenance, so the result is stamped
// Provenance::generated("", 0); callers that know the producing model rebind
// via TaskFrameSpec::with_provenance.
ParseOutcome parse_generation(std::string_view text, const TaskName& target);

}  // namespace tff
