// Regenerates every fixture and golden file from the builtin data and the
// synthetic completion plan. Deterministic: reruns are byte-identical. Run
// from anywhere with the repository root as the only argument (default ".").

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tff/errors.hpp"
#include "tff/eval.hpp"
#include "tff/llm.hpp"
#include "tff/prompt.hpp"
#include "tff/rules.hpp"
#include "tff/sim.hpp"
#include "tff/spec_json.hpp"
#include "tff/types.hpp"

namespace fs = std::filesystem;
using namespace tff;

namespace {

// Fixed stamp: synthetic records carry no real wall-clock time.
constexpr const char* kSyntheticTimestamp = "2023-07-01T00:00:00Z";

const std::vector<std::string> kModels = {"gpt-3.5-turbo", "gpt-4", "bard",
                                          "llama-2-70b"};
const std::vector<int> kShotCounts = {0, 1, 3, 5};

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
}

std::set<int> all_tasks_except(std::initializer_list<int> missing) {
  std::set<int> tasks;
  for (int no = 1; no <= 30; ++no) tasks.insert(no);
  for (int no : missing) tasks.erase(no);
  return tasks;
}

// Which tasks each model answers correctly at five shots. The other shot
// counts only pin aggregate counts, realized as the first K tasks correct.
const std::map<std::string, std::set<int>>& five_shot_correct() {
  static const std::map<std::string, std::set<int>> plan = {
      {"gpt-3.5-turbo", all_tasks_except({6, 11, 12, 13, 16, 17, 22, 24, 26, 30})},
      {"gpt-4", all_tasks_except({13, 16, 20, 26, 30})},
      {"bard", all_tasks_except({2, 8, 11, 12, 17, 20, 22, 25, 26})},
      {"llama-2-70b", {1, 5, 15, 25}},
  };
  return plan;
}

const std::map<std::string, std::map<int, int>>& low_shot_correct_counts() {
  static const std::map<std::string, std::map<int, int>> plan = {
      {"gpt-3.5-turbo", {{0, 0}, {1, 9}, {3, 21}}},
      {"gpt-4", {{0, 0}, {1, 14}, {3, 19}}},
      {"bard", {{0, 0}, {1, 0}, {3, 14}}},
      {"llama-2-70b", {{0, 0}, {1, 0}, {3, 2}}},
  };
  return plan;
}

const std::map<std::string, std::map<int, std::string>>& expected_rates() {
  static const std::map<std::string, std::map<int, std::string>> table = {
      {"gpt-3.5-turbo", {{0, "0.00"}, {1, "0.30"}, {3, "0.70"}, {5, "0.67"}}},
      {"gpt-4", {{0, "0.00"}, {1, "0.47"}, {3, "0.63"}, {5, "0.83"}}},
      {"bard", {{0, "0.00"}, {1, "0.00"}, {3, "0.47"}, {5, "0.70"}}},
      {"llama-2-70b", {{0, "0.00"}, {1, "0.00"}, {3, "0.07"}, {5, "0.13"}}},
  };
  return table;
}

bool planned_correct(const std::string& model, int shots, int task_no) {
  if (shots == 5) return five_shot_correct().at(model).count(task_no) > 0;
  return task_no <= low_shot_correct_counts().at(model).at(shots);
}

std::string coords_for(int task_no) {
  switch (task_no) {
    case 1: return "attached to the cutter wheel, z axis points down through the pizza";
    case 2: return "attached to the brush head, x axis along the scrubbing stroke, z axis points up from the desk";
    case 3: return "attached to the fork tines, z axis points down into the cake";
    case 4: return "attached to the screwdriver tip, z axis points into the screw head";
    case 5: return "attached to the screwdriver tip, z axis points into the screw head";
    case 6: return "attached to the key bow, z axis along the keyway";
    case 7: return "attached to the wrench jaw, z axis along the bolt axis";
    case 8: return "attached to the wrench jaw, z axis along the bolt axis";
    case 9: return "attached to the brush bristles, x and y axes span the painted surface";
    case 10: return "attached to the nail head, z axis points up along the nail";
    case 11: return "attached to the rasp, x axis along the rasping stroke, z axis points away from the wood";
    case 12: return "attached to the scraper edge, x axis along the scraping stroke, z axis points away from the surface";
    case 13: return "attached to the peeler blade, x axis presses against the potato skin";
    case 14: return "attached to the knife edge, z axis points down through the cucumber";
    case 15: return "attached to the spatula blade, x axis along the spatula edge";
    case 16: return "attached to the razor head, x axis along the shaving stroke, z axis points away from the object";
    case 17: return "attached to the roller axle, x axis along the rolling direction, z axis points up from the dough";
    case 18: return "attached to the peg tip, z axis points into the hole";
    case 19: return "attached to the brush bristles, x axis across the tray, z axis points up from the tray";
    case 20: return "attached to the straw tip, z axis points down through the lid";
    case 21: return "attached to the hinge line, z axis along the hinge";
    case 22: return "attached to the block face, z axis points up along the wall, x axis points out of the wall";
    case 23: return "attached to the wheel hub, z axis along the steering column";
    case 24: return "attached to the bottle body, x axis across the shaker";
    case 25: return "attached to the knife edge, z axis points down through the banana";
    case 26: return "attached to the egg shell, z axis points toward the bowl rim";
    case 27: return "attached to the fingertip, z axis points into the button";
    case 28: return "attached to the card edge connector, z axis points down into the socket";
    case 29: return "attached to the bottle cap, z axis along the bottle neck";
    case 30: return "attached to the bottle cap, z axis along the bottle neck";
    default: raise(ErrorCode::Internal, "no coordinates for task " + std::to_string(task_no));
  }
}

TaskFrameSpec build_spec(const std::string& task_name, int task_no,
                         const std::vector<AxisDirective>& directives) {
  return TaskFrameSpec::create(normalize_task_name(task_name),
                               make_coordinate_setting(coords_for(task_no)),
                               directives);
}

// Directive sets that satisfy each task's requirement.
std::vector<AxisDirective> correct_directives(int task_no) {
  switch (task_no) {
    case 1: return {make_directive(Axis::TZ, -5, Unit::CmPerSec)};
    case 2: return {make_directive(Axis::TX, 5, Unit::CmPerSec),
                    make_directive(Axis::TZ, -5, Unit::Newton)};
    case 3: return {make_directive(Axis::TZ, -5, Unit::Centimeter)};
    case 4: return {make_directive(Axis::RZ, 5, Unit::RadPerSec)};
    case 5: return {make_directive(Axis::RZ, -5, Unit::RadPerSec)};
    case 6: return {make_directive(Axis::RZ, 2, Unit::RadPerSec)};
    case 7: return {make_directive(Axis::RZ, 5, Unit::RadPerSec)};
    case 8: return {make_directive(Axis::RZ, -5, Unit::RadPerSec)};
    case 9: return {make_directive(Axis::TX, 5, Unit::CmPerSec),
                    make_directive(Axis::TY, 5, Unit::CmPerSec)};
    case 10: return {make_directive(Axis::TZ, -5, Unit::Newton)};
    case 11: return {make_directive(Axis::TX, 5, Unit::CmPerSec),
                     make_directive(Axis::TZ, -5, Unit::Newton)};
    case 12: return {make_directive(Axis::TX, 5, Unit::CmPerSec),
                     make_directive(Axis::TZ, -5, Unit::Newton)};
    case 13: return {make_directive(Axis::TX, -5, Unit::Newton)};
    case 14: return {make_directive(Axis::TZ, -5, Unit::CmPerSec)};
    case 15: return {make_directive(Axis::RX, 3, Unit::Radian)};
    case 16: return {make_directive(Axis::TX, 5, Unit::CmPerSec),
                     make_directive(Axis::TZ, -2, Unit::Newton)};
    case 17: return {make_directive(Axis::TX, 5, Unit::CmPerSec),
                     make_directive(Axis::TZ, -5, Unit::Newton)};
    case 18: return {make_directive(Axis::TZ, -5, Unit::Centimeter)};
    case 19: return {make_directive(Axis::TX, 5, Unit::CmPerSec),
                     make_directive(Axis::TZ, -2, Unit::Newton)};
    case 20: return {make_directive(Axis::TZ, -5, Unit::Centimeter)};
    case 21: return {make_directive(Axis::RZ, 2, Unit::RadPerSec)};
    case 22: return {make_directive(Axis::TZ, 5, Unit::CmPerSec),
                     make_directive(Axis::TX, -5, Unit::Newton)};
    case 23: return {make_directive(Axis::RZ, 2, Unit::RadPerSec)};
    case 24: return {make_directive(Axis::RX, 5, Unit::RadPerSec)};
    case 25: return {make_directive(Axis::TZ, -5, Unit::CmPerSec)};
    case 26: return {make_directive(Axis::TZ, -5, Unit::CmPerSec)};
    case 27: return {make_directive(Axis::TZ, -2, Unit::Centimeter)};
    case 28: return {make_directive(Axis::TZ, -5, Unit::Centimeter)};
    case 29: return {make_directive(Axis::RZ, -5, Unit::RadPerSec)};
    case 30: return {make_directive(Axis::RZ, -5, Unit::RadPerSec),
                     make_directive(Axis::TZ, -5, Unit::Newton)};
    default: raise(ErrorCode::Internal, "no template for task " + std::to_string(task_no));
  }
}

// Plausible but wrong directive sets: missing forces, over-specified axes,
// wrong axis class, wrong control mode. Each fails its task's requirement.
std::vector<AxisDirective> wrong_directives(int task_no) {
  switch (task_no) {
    // Sawing with two axes where one is required.
    case 1: case 14: case 25:
      return {make_directive(Axis::TX, 5, Unit::CmPerSec),
              make_directive(Axis::TY, 5, Unit::CmPerSec)};
    // Stroke without the pressing force.
    case 2: case 11: case 12: case 16: case 17: case 22:
      return {make_directive(Axis::TX, 5, Unit::CmPerSec)};
    // Insert-and-twist where a single direction is required.
    case 3: case 18: case 27: case 28:
      return {make_directive(Axis::TZ, -5, Unit::Centimeter),
              make_directive(Axis::RZ, 2, Unit::RadPerSec)};
    // Translation instead of rotation.
    case 4: case 5: case 7: case 8: case 23: case 29:
      return {make_directive(Axis::TZ, -5, Unit::Centimeter)};
    case 6:
      return {make_directive(Axis::TZ, -5, Unit::Centimeter)};
    // Rotation (or a second axis) where the plan has no room for it.
    case 9: case 19:
      return {make_directive(Axis::RZ, 5, Unit::RadPerSec)};
    case 10:
      return {make_directive(Axis::TZ, -5, Unit::Newton),
              make_directive(Axis::TX, 5, Unit::CmPerSec)};
    case 21:
      return {make_directive(Axis::RZ, 2, Unit::RadPerSec),
              make_directive(Axis::TX, 5, Unit::CmPerSec)};
    // Lift instead of flip.
    case 15:
      return {make_directive(Axis::TZ, 5, Unit::Centimeter)};
    // Pressing force where an approach motion is required.
    case 20: case 26:
      return {make_directive(Axis::TZ, -5, Unit::Newton)};
    // Motion without the peeling force.
    case 13:
      return {make_directive(Axis::TZ, -5, Unit::Centimeter)};
    case 24:
      return {make_directive(Axis::TY, 5, Unit::CmPerSec)};
    // Same frame as the plain bottle: the extra pressing force is missing.
    case 30:
      return correct_directives(29);
    default: raise(ErrorCode::Internal, "no wrong template for task " + std::to_string(task_no));
  }
}

// Hand-picked departures from the generic wrong templates, keyed by model and
// task. Values of nullopt fall through to wrong_directives.
std::vector<AxisDirective> planned_directives(const std::string& model, int shots,
                                              int task_no) {
  if (planned_correct(model, shots, task_no)) {
    // Near-bound force: the value sits exactly on the envelope bound, allowed.
    if (model == "bard" && shots == 5 && task_no == 10)
      return {make_directive(Axis::TZ, 50, Unit::Newton)};
    return correct_directives(task_no);
  }
  if (model == "bard" && shots == 5) {
    // Same spin direction as the fastening task: opposite-sign check fails.
    if (task_no == 8) return {make_directive(Axis::RZ, 5, Unit::RadPerSec)};
    // Spin instead of slice, far past the angular rate bound.
    if (task_no == 25) return {make_directive(Axis::RZ, 100, Unit::RadPerSec)};
  }
  return wrong_directives(task_no);
}

// Completion text shapes ------------------------------------------------

std::string def_block(const TaskFrameSpec& spec) {
  std::string text = render_function(spec, FunctionRole::source(1));
  return text.substr(text.find('\n') + 1);  // drop the role comment line
}

std::string refusal_text(const std::string& task_display) {
  return "There is no example to follow here, so I cannot fill in the axis "
         "values. Could you describe the motion, the contact forces, and the "
         "coordinate setting that \"" +
         task_display + "\" requires?";
}

std::string bare_call_line(const TaskFrameSpec& source) {
  std::string line = source.task().normalized + "(";
  bool first = true;
  for (Axis axis : kAllAxes) {
    const AxisDirective& directive = source.directive(axis);
    if (!directive.active()) continue;
    if (!first) line += ", ";
    line += std::string(axis_param_name(axis)) + "=" + format_number(directive.value);
    first = false;
  }
  return line + ")";
}

// Degenerate transcript that only re-invokes the prompt's source functions.
std::string repeated_calls_text(const SourceLibrary& library, int shots) {
  std::string text;
  for (int i = 0; i < 6; ++i)
    text += bare_call_line(library.sources()[i % shots]) + "\n";
  return text;
}

std::string styled_completion(const std::string& model, int task_no,
                              const std::string& block) {
  if (model == "gpt-3.5-turbo") {
    if (task_no % 3 == 0) return "Here is the target function:\n\n" + block;
    if (task_no % 3 == 2) return "```python\n" + block + "```\n";
    return block;
  }
  if (model == "gpt-4") {
    if (task_no % 2 == 0) return "```python\n" + block + "```\n";
    return block;
  }
  if (model == "bard")
    return "Sure, here is the completed target function based on the task "
           "frame formalism examples:\n\n```python\n" + block + "```\n";
  return block;
}

std::string completion_for(const SourceLibrary& library, const std::string& model,
                           int shots, const PrimitiveTask& task) {
  if (shots == 0) return refusal_text(task.name);
  if (model == "llama-2-70b" && !planned_correct(model, shots, task.task_no))
    return repeated_calls_text(library, shots);
  TaskFrameSpec spec = build_spec(task.name, task.task_no,
                                  planned_directives(model, shots, task.task_no));
  return styled_completion(model, task.task_no, def_block(spec));
}

// Output sections --------------------------------------------------------

void write_replay_fixture(const fs::path& path, const SourceLibrary& library) {
  fs::create_directories(path.parent_path());
  fs::remove(path);
  FixtureStore store(path.string(), false);
  for (const std::string& model : kModels) {
    ModelConfig config = ModelConfig::preset(model);
    for (int shots : kShotCounts) {
      for (const PrimitiveTask& task : task_catalog()) {
        PromptBundle bundle =
            build_nshot_prompt(library, normalize_task_name(task.name), shots);
        CompletionRecord record;
        record.request_hash = request_hash(bundle.text, config);
        record.prompt = bundle.text;
        record.completion = completion_for(library, model, shots, task);
        record.timestamp = kSyntheticTimestamp;
        record.model_id = model;
        record.origin = "synthetic";
        store.append(record);
      }
    }
  }
  std::printf("wrote %s (%zu records)\n", path.string().c_str(), store.size());
}

void write_demo_fixture(const fs::path& path, const SourceLibrary& library) {
  fs::create_directories(path.parent_path());
  fs::remove(path);
  FixtureStore store(path.string(), false);
  ModelConfig config = ModelConfig::preset("gpt-4");

  auto add = [&](const std::string& prompt, const std::string& completion) {
    CompletionRecord record;
    record.request_hash = request_hash(prompt, config);
    record.prompt = prompt;
    record.completion = completion;
    record.timestamp = kSyntheticTimestamp;
    record.model_id = config.model_id;
    record.origin = "synthetic";
    store.append(record);
  };

  TaskName open_bottle = normalize_task_name("open bottle");
  add(build_primitiveness_prompt(open_bottle),
      "Yes. Opening a bottle uses a single twisting strategy around the cap "
      "axis, so it is a primitive task.");
  TaskFrameSpec cap_spec = build_spec("open bottle", 29, correct_directives(29));
  add(build_nshot_prompt(library, open_bottle, 5).text,
      styled_completion("gpt-4", 29, def_block(cap_spec)));
  add(build_primitiveness_prompt(normalize_task_name("assemble computer")),
      "No. Assembling a computer decomposes into many lower-level tasks with "
      "different control strategies and coordinate settings, so it is not a "
      "primitive task.");
  std::printf("wrote %s (%zu records)\n", path.string().c_str(), store.size());
}

void write_environments(const fs::path& dir) {
  write_file(dir / "free_space.json",
             environment_to_json_text(EnvironmentModel::free_space()));
  write_file(dir / "desk.json",
             environment_to_json_text(EnvironmentModel::desk_default()));
  EnvironmentModel wall = EnvironmentModel::free_space();
  wall.name = "wall";
  wall.contacts[static_cast<size_t>(Axis::TX)] = {true, 200.0, 0.5};
  write_file(dir / "wall.json", environment_to_json_text(wall));
  std::printf("wrote %s\n", dir.string().c_str());
}

void write_demo_specs(const fs::path& dir, const SourceLibrary& library) {
  write_file(dir / "turn_screw.json",
             spec_to_json(library.sources()[0]).dump(2) + "\n");
  write_file(dir / "slide_box_upward_on_wall.json",
             spec_to_json(library.sources()[4]).dump(2) + "\n");
  TaskFrameSpec unsafe = TaskFrameSpec::create(
      normalize_task_name("push box hard"),
      make_coordinate_setting("attached to the box face, z axis points into the box"),
      {make_directive(Axis::TZ, -80, Unit::Newton)});
  write_file(dir / "push_box_hard.json", spec_to_json(unsafe).dump(2) + "\n");
  std::printf("wrote %s\n", dir.string().c_str());
}

void write_prompt_goldens(const fs::path& dir, const SourceLibrary& library) {
  TaskName cut_pizza = normalize_task_name("cut pizza");
  for (int shots : kShotCounts)
    write_file(dir / ("prompt_cut_pizza_" + std::to_string(shots) + "shot.txt"),
               build_nshot_prompt(library, cut_pizza, shots).text);
  write_file(dir / "primitiveness_open_bottle.txt",
             build_primitiveness_prompt(normalize_task_name("open bottle")));
  std::printf("wrote prompt goldens in %s\n", dir.string().c_str());
}

// Replays the fixture through the real harness and checks the plan landed.
std::vector<EvalRun> verify_runs(const fs::path& replay_path) {
  ClientOptions options;
  options.fixture_path = replay_path.string();
  Client client(Backend::Replay, options);

  std::vector<EvalRun> runs;
  int failures = 0;
  for (const std::string& model : kModels) {
    for (int shots : kShotCounts) {
      EvalRun run = run_eval(client, ModelConfig::preset(model), shots);
      for (const TaskResult& result : run.results) {
        if (result.errored()) {
          std::fprintf(stderr, "UNEXPECTED ERROR %s %d-shot task %d: %s\n",
                       model.c_str(), shots, result.task_no, result.error.c_str());
          ++failures;
        }
        if (result.correct() != planned_correct(model, shots, result.task_no)) {
          std::fprintf(stderr, "PLAN MISMATCH %s %d-shot task %d: planned %s\n",
                       model.c_str(), shots, result.task_no,
                       planned_correct(model, shots, result.task_no) ? "correct"
                                                                     : "incorrect");
          ++failures;
        }
      }
      std::string rate = format_rate(run.correct_count(), (int)run.results.size());
      const std::string& expected = expected_rates().at(model).at(shots);
      if (rate != expected) {
        std::fprintf(stderr, "RATE MISMATCH %s %d-shot: %s, expected %s\n",
                     model.c_str(), shots, rate.c_str(), expected.c_str());
        ++failures;
      }
      std::printf("verified %-13s %d-shot: %2d/30 (%s)\n", model.c_str(), shots,
                  run.correct_count(), rate.c_str());
      runs.push_back(std::move(run));
    }
  }
  if (failures) raise(ErrorCode::Internal, "fixture plan verification failed");
  return runs;
}

void write_report_goldens(const fs::path& dir, const std::vector<EvalRun>& runs) {
  write_file(dir / "report_rates.txt", render_report(runs, ReportStyle::RateTable));
  std::vector<EvalRun> five_shot;
  for (const EvalRun& run : runs)
    if (run.shots == 5) five_shot.push_back(run);
  write_file(dir / "report_dots_5shot.txt",
             render_report(five_shot, ReportStyle::DotGrid));
  std::printf("wrote report goldens in %s\n", dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  fs::path root = argc > 1 ? argv[1] : ".";
  try {
    const SourceLibrary& library = SourceLibrary::builtin();

    write_file(root / "fixtures" / "source_library.json",
               source_library_to_json_text(library));
    write_file(root / "fixtures" / "metric_rules.json", canonical_rules_json_text());
    write_environments(root / "fixtures" / "environments");
    write_demo_specs(root / "fixtures" / "specs", library);

    fs::path replay_path = root / "fixtures" / "replay" / "paper_eval.jsonl";
    write_replay_fixture(replay_path, library);
    write_demo_fixture(root / "fixtures" / "replay" / "demo.jsonl", library);

    write_prompt_goldens(root / "tests" / "golden", library);
    std::vector<EvalRun> runs = verify_runs(replay_path);
    write_report_goldens(root / "tests" / "golden", runs);

    std::printf("fixture generation complete\n");
    return 0;
  } catch (const Error& err) {
    std::fprintf(stderr, "fixture generation failed: %s\n", err.what());
    return 1;
  }
}
