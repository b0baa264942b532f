#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tff/llm.hpp"
#include "tff/parser.hpp"
#include "tff/prompt.hpp"
#include "tff/rules.hpp"

namespace tff {

struct PrimitiveTask {
  int task_no = 0;
  std::string name;  // display text, e.g. "scrub desk with bench brush"
};

// The 30 evaluation tasks, numbered 1..30. Names come from the requirement
// catalog so the two can never disagree.
const std::vector<PrimitiveTask>& task_catalog();

struct TaskResult {
  int task_no = 0;
  std::string task;
  int shots = 0;
  std::string model_id;
  std::string raw_completion;
  ParseOutcome parse_outcome;
  std::optional<Verdict> verdict;  // present iff the parse succeeded
  std::string error;               // backend failure message, empty otherwise
  ErrorCode error_code = ErrorCode::Ok;
  double timing_ms = 0.0;

  bool errored() const { return error_code != ErrorCode::Ok; }
  // Errored and Rejected both count as incorrect.
  bool correct() const { return verdict && verdict->correct; }

  bool operator==(const TaskResult&) const = default;
};

struct EvalRun {
  std::string run_id;
  std::string model_id;
  int shots = 0;
  std::string backend;
  std::vector<TaskResult> results;

  int correct_count() const;
  // Correct fraction rounded half-up to 2 decimals, e.g. 20/30 -> 0.67.
  double correct_rate() const;

  bool operator==(const EvalRun&) const = default;
};

// "0.67" style formatting of count/total with half-up rounding to 2 decimals.
std::string format_rate(int count, int total);

// Runs the full catalog in task order (relational rules read earlier tasks'
// specs from the run context, so 4 precedes 5, 7 precedes 8, 29 precedes 30).
// Backend errors mark the task Errored and the run continues.
EvalRun run_eval(Client& client, const ModelConfig& model, int shots,
                 const SourceLibrary& library = SourceLibrary::builtin(),
                 const RuleSet& rules = RuleSet::builtin(),
                 const SafetyEnvelope& envelope = SafetyEnvelope{});

enum class ReportStyle { RateTable, DotGrid, Json };

ReportStyle report_style_from_name(std::string_view name);  // rates|dots|json

// RateTable: models x shot-counts grid of correct rates. DotGrid: per-run
// rows of 10 tasks, 'o' correct, 'x' incorrect. Json: machine-readable dump.
// All three styles omit timing so replayed runs render byte-identically.
std::string render_report(const std::vector<EvalRun>& runs, ReportStyle style);

// JSONL: a header line with run metadata and a result-count, then one line
// per TaskResult. load_run checks the schema tag and the count.
void persist_run(const EvalRun& run, const std::string& path);
EvalRun load_run(const std::string& path);

}  // namespace tff
