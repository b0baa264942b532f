#include "tff/eval.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tff/spec_json.hpp"

namespace tff {

namespace {

using nlohmann::json;

constexpr const char* kRunSchema = "tff.eval_run.v1";

json task_result_to_json(const TaskResult& result) {
  json out = {{"task_no", result.task_no},
              {"task", result.task},
              {"shots", result.shots},
              {"model", result.model_id},
              {"completion", result.raw_completion},
              {"timing_ms", result.timing_ms}};
  if (result.errored()) {
    out["error"] = {{"code", error_code_name(result.error_code)},
                    {"message", result.error}};
  } else {
    out["parse"] = parse_outcome_to_json(result.parse_outcome);
  }
  if (result.verdict) out["verdict"] = verdict_to_json(*result.verdict);
  return out;
}

ErrorCode error_code_from_name(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::Internal); ++i) {
    auto code = static_cast<ErrorCode>(i);
    if (error_code_name(code) == name) return code;
  }
  raise(ErrorCode::SchemaMismatch, "unknown error code \"" + name + "\"");
}

TaskResult task_result_from_json(const json& value) {
  if (!value.is_object() || !value.contains("task_no")) {
    raise(ErrorCode::SchemaMismatch, "result line needs a task_no");
  }
  TaskResult result;
  result.task_no = value["task_no"].get<int>();
  result.task = value.value("task", std::string{});
  result.shots = value.value("shots", 0);
  result.model_id = value.value("model", std::string{});
  result.raw_completion = value.value("completion", std::string{});
  result.timing_ms = value.value("timing_ms", 0.0);
  if (value.contains("error")) {
    result.error_code = error_code_from_name(value["error"].value("code", ""));
    result.error = value["error"].value("message", std::string{});
  } else if (value.contains("parse")) {
    result.parse_outcome = parse_outcome_from_json(value["parse"]);
  }
  if (value.contains("verdict") && !value["verdict"].is_null()) {
    result.verdict = verdict_from_json(value["verdict"]);
  }
  return result;
}

json run_to_report_json(const EvalRun& run) {
  json results = json::array();
  for (const TaskResult& result : run.results) {
    json entry = task_result_to_json(result);
    entry.erase("timing_ms");  // keep replayed reports byte-identical
    entry["correct"] = result.correct();
    results.push_back(std::move(entry));
  }
  return {{"run_id", run.run_id},
          {"model", run.model_id},
          {"shots", run.shots},
          {"backend", run.backend},
          {"correct", run.correct_count()},
          {"total", run.results.size()},
          {"correct_rate", format_rate(run.correct_count(),
                                       static_cast<int>(run.results.size()))},
          {"results", std::move(results)}};
}

std::string render_rate_table(const std::vector<EvalRun>& runs) {
  // Fixed shot columns first, any unusual counts appended.
  std::vector<int> shot_columns = {0, 1, 3, 5};
  for (const EvalRun& run : runs) {
    if (std::find(shot_columns.begin(), shot_columns.end(), run.shots) ==
        shot_columns.end()) {
      shot_columns.push_back(run.shots);
    }
  }

  // Rows in preset order, unknown models after, first-seen order.
  std::vector<std::string> models;
  for (const std::string& id : ModelConfig::preset_ids()) {
    if (std::any_of(runs.begin(), runs.end(),
                    [&](const EvalRun& r) { return r.model_id == id; })) {
      models.push_back(id);
    }
  }
  for (const EvalRun& run : runs) {
    if (std::find(models.begin(), models.end(), run.model_id) == models.end()) {
      models.push_back(run.model_id);
    }
  }

  std::map<std::pair<std::string, int>, std::string> cells;
  for (const EvalRun& run : runs) {
    cells[{run.model_id, run.shots}] = format_rate(
        run.correct_count(), static_cast<int>(run.results.size()));
  }

  size_t name_width = std::string("model").size();
  for (const std::string& model : models) name_width = std::max(name_width, model.size());

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_width)) << "model";
  for (int shots : shot_columns) {
    out << std::right << std::setw(8) << (std::to_string(shots) + "-shot");
  }
  out << "\n";
  for (const std::string& model : models) {
    out << std::left << std::setw(static_cast<int>(name_width)) << model;
    for (int shots : shot_columns) {
      auto cell = cells.find({model, shots});
      out << std::right << std::setw(8)
          << (cell == cells.end() ? std::string("-") : cell->second);
    }
    out << "\n";
  }
  return out.str();
}

std::string render_dot_grid(const std::vector<EvalRun>& runs) {
  std::ostringstream out;
  bool first = true;
  for (const EvalRun& run : runs) {
    if (!first) out << "\n";
    first = false;
    out << run.model_id << " " << run.shots << "-shot (" << run.backend << ")\n";
    for (size_t begin = 0; begin < run.results.size(); begin += 10) {
      size_t end = std::min(begin + 10, run.results.size());
      std::string label = std::to_string(run.results[begin].task_no) + "-" +
                          std::to_string(run.results[end - 1].task_no);
      out << std::right << std::setw(5) << label << ":";
      for (size_t i = begin; i < end; ++i) {
        out << " " << (run.results[i].correct() ? 'o' : 'x');
      }
      out << "\n";
    }
    out << "correct: " << run.correct_count() << "/" << run.results.size() << " ("
        << format_rate(run.correct_count(), static_cast<int>(run.results.size()))
        << ")\n";
  }
  return out.str();
}

}  // namespace

const std::vector<PrimitiveTask>& task_catalog() {
  static const std::vector<PrimitiveTask> catalog = [] {
    std::vector<PrimitiveTask> tasks;
    for (const MetricRule& rule : RuleSet::builtin().rules()) {
      tasks.push_back(PrimitiveTask{rule.task_no, rule.task});
    }
    return tasks;
  }();
  return catalog;
}

int EvalRun::correct_count() const {
  return static_cast<int>(std::count_if(results.begin(), results.end(),
                                        [](const TaskResult& r) { return r.correct(); }));
}

double EvalRun::correct_rate() const {
  if (results.empty()) return 0.0;
  const int total = static_cast<int>(results.size());
  const int percent = (200 * correct_count() + total) / (2 * total);
  return percent / 100.0;
}

std::string format_rate(int count, int total) {
  if (total <= 0) return "0.00";
  const int percent = (200 * count + total) / (2 * total);  // half-up
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%d.%02d", percent / 100, percent % 100);
  return buf;
}

EvalRun run_eval(Client& client, const ModelConfig& model, int shots,
                 const SourceLibrary& library, const RuleSet& rules,
                 const SafetyEnvelope& envelope) {
  EvalRun run;
  run.model_id = model.model_id;
  run.shots = shots;
  run.backend = std::string(backend_name(client.backend()));
  run.run_id = run.backend + "-" + model.model_id + "-" + std::to_string(shots) +
               "shot";
  if (client.backend() != Backend::Replay) {
    run.run_id += "-" + now_iso8601_utc();  // replay ids stay deterministic
  }

  std::map<int, TaskFrameSpec> context;
  for (const PrimitiveTask& task : task_catalog()) {
    TaskResult result;
    result.task_no = task.task_no;
    result.task = task.name;
    result.shots = shots;
    result.model_id = model.model_id;

    const auto started = std::chrono::steady_clock::now();
    TaskName target = normalize_task_name(task.name);
    PromptBundle bundle = build_nshot_prompt(library, target, shots);
    try {
      result.raw_completion = client.complete(bundle.text, model);
      result.parse_outcome = parse_generation(result.raw_completion, target);
      if (result.parse_outcome.ok()) {
        result.parse_outcome.spec = result.parse_outcome.spec->with_provenance(
            Provenance::generated(model.model_id, shots));
        context.emplace(task.task_no, *result.parse_outcome.spec);
        result.verdict =
            validate(*result.parse_outcome.spec, rules.rule(task.task_no), context,
                     envelope);
      }
    } catch (const Error& e) {
      result.error_code = e.code();
      result.error = e.what();
    }
    result.timing_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - started)
                           .count();
    run.results.push_back(std::move(result));
  }
  return run;
}

ReportStyle report_style_from_name(std::string_view name) {
  if (name == "rates") return ReportStyle::RateTable;
  if (name == "dots") return ReportStyle::DotGrid;
  if (name == "json") return ReportStyle::Json;
  raise(ErrorCode::InvalidArgument,
        "unknown report style \"" + std::string(name) + "\"; use rates, dots or json");
}

std::string render_report(const std::vector<EvalRun>& runs, ReportStyle style) {
  switch (style) {
    case ReportStyle::RateTable:
      return render_rate_table(runs);
    case ReportStyle::DotGrid:
      return render_dot_grid(runs);
    case ReportStyle::Json: {
      json doc = {{"runs", json::array()}};
      for (const EvalRun& run : runs) doc["runs"].push_back(run_to_report_json(run));
      return doc.dump(2) + "\n";
    }
  }
  return "";
}

void persist_run(const EvalRun& run, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    raise(ErrorCode::IoError, "cannot write run file " + path);
  }
  json header = {{"schema", kRunSchema},
                 {"run_id", run.run_id},
                 {"model", run.model_id},
                 {"shots", run.shots},
                 {"backend", run.backend},
                 {"results", run.results.size()}};
  out << header.dump() << "\n";
  for (const TaskResult& result : run.results) {
    out << task_result_to_json(result).dump() << "\n";
  }
  out.flush();
  if (!out) {
    raise(ErrorCode::IoError, "write to run file failed: " + path);
  }
}

EvalRun load_run(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open run file " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    raise(ErrorCode::SchemaMismatch, path + ": missing header line");
  }
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    raise(ErrorCode::SchemaMismatch, path + ": header is not valid JSON: " + e.what());
  }
  if (header.value("schema", "") != kRunSchema) {
    raise(ErrorCode::SchemaMismatch,
          path + ": expected schema " + std::string(kRunSchema) + ", got \"" +
              header.value("schema", "") + "\"");
  }

  EvalRun run;
  run.run_id = header.value("run_id", std::string{});
  run.model_id = header.value("model", std::string{});
  run.shots = header.value("shots", 0);
  run.backend = header.value("backend", std::string{});
  const auto expected = header.value("results", size_t{0});

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::exception& e) {
      raise(ErrorCode::SchemaMismatch,
            path + ":" + std::to_string(line_no) + ": not valid JSON: " + e.what());
    }
    run.results.push_back(task_result_from_json(entry));
  }
  if (run.results.size() != expected) {
    raise(ErrorCode::SchemaMismatch,
          path + ": header promises " + std::to_string(expected) + " results, found " +
              std::to_string(run.results.size()));
  }
  return run;
}

}  // namespace tff
