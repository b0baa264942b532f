// End-to-end acceptance checks, one printed line per criterion. Exits nonzero
// when any line reports FAIL. Tolerances and budgets are pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "support/generators.hpp"
#include "tff/errors.hpp"
#include "tff/eval.hpp"
#include "tff/llm.hpp"
#include "tff/parser.hpp"
#include "tff/prompt.hpp"
#include "tff/rules.hpp"
#include "tff/sim.hpp"
#include "tff/types.hpp"

using namespace tff;
namespace fs = std::filesystem;

namespace {

constexpr double kEvalBudgetSeconds = 5.0;
constexpr double kParserBudgetSeconds = 30.0;
constexpr double kSimBudgetSeconds = 1.0;
constexpr double kConvergenceTolerance = 0.01;   // relative, at t = 2 s
constexpr double kDtHalvingTolerance = 0.005;    // relative shift of finals
constexpr int kRoundTripSamples = 200;
constexpr int kFuzzSamples = 10000;
constexpr int kMutationSamples = 2000;
constexpr int kPermutationTrials = 1000;

int g_failures = 0;

void report(int number, bool pass, const char* description) {
  std::printf("%s %d %s\n", pass ? "PASS" : "FAIL", number, description);
  if (!pass) ++g_failures;
}

void detail(const std::string& message) {
  std::fprintf(stderr, "  %s\n", message.c_str());
}

std::string source_path(const std::string& rel) {
  return std::string(TFF_SOURCE_DIR) + "/" + rel;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    detail("cannot open " + path);
    return {};
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

TaskFrameSpec single_directive_spec(const std::string& task, Axis axis, double value,
                                    Unit unit) {
  return TaskFrameSpec::create(
      normalize_task_name(task),
      make_coordinate_setting("z axis points into the workpiece"),
      {make_directive(axis, value, unit)});
}

// 1. Five-shot replay over the shipped fixtures reproduces the recorded rates.
bool check_table_reproduction() {
  const auto start = std::chrono::steady_clock::now();
  ClientOptions options;
  options.fixture_path = source_path("fixtures/replay/paper_eval.jsonl");
  Client client(Backend::Replay, options);

  const std::vector<std::pair<std::string, std::string>> expected = {
      {"gpt-3.5-turbo", "0.67"},
      {"gpt-4", "0.83"},
      {"bard", "0.70"},
      {"llama-2-70b", "0.13"},
  };
  bool ok = true;
  for (const auto& [model, rate] : expected) {
    EvalRun run = run_eval(client, ModelConfig::preset(model), 5);
    std::string got = format_rate(run.correct_count(),
                                  static_cast<int>(run.results.size()));
    if (got != rate) {
      detail(model + " 5-shot rate " + got + ", expected " + rate);
      ok = false;
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= kEvalBudgetSeconds) {
    detail("replay eval took " + std::to_string(elapsed) + " s");
    ok = false;
  }
  return ok;
}

// 2. The four recorded judgment cases come out with the exact booleans.
bool check_recorded_failure_cases() {
  const RuleSet& rules = RuleSet::builtin();
  bool ok = true;

  // (a) straw insertion given a force directive: right axis, wrong mode
  TaskFrameSpec straw = single_directive_spec("insert straw through cup lid",
                                              Axis::TZ, -5, Unit::Newton);
  if (validate(straw, rules.rule(20)).correct) {
    detail("force-mode straw spec should be incorrect for task 20");
    ok = false;
  }

  // (b) childproof cap answered with the plain cap spec: no added force
  TaskFrameSpec cap = single_directive_spec("open bottle", Axis::RZ, -5,
                                            Unit::RadPerSec);
  TaskFrameSpec childproof = TaskFrameSpec::create(
      normalize_task_name("open childproof bottle"), cap.coordinates(),
      {cap.directive(Axis::RZ)});
  std::map<int, TaskFrameSpec> context;
  context.emplace(29, cap);
  if (!validate(cap, rules.rule(29)).correct) {
    detail("plain cap spec should be correct for task 29");
    ok = false;
  }
  if (validate(childproof, rules.rule(30), context).correct) {
    detail("identical cap spec should be incorrect for task 30");
    ok = false;
  }

  // (c) hammering with the envelope-bound force: correct and safe
  TaskFrameSpec hammer = single_directive_spec("hammer in nail", Axis::TZ, 50,
                                               Unit::Newton);
  Verdict hammer_verdict = validate(hammer, rules.rule(10));
  if (!hammer_verdict.correct || !hammer_verdict.safety_violations.empty()) {
    detail("50 N hammer spec should be correct with zero safety violations");
    ok = false;
  }

  // (d) spinning the knife at 100 rad/sec trips exactly one envelope bound
  TaskFrameSpec spin = single_directive_spec("cut banana", Axis::RZ, 100,
                                             Unit::RadPerSec);
  if (safety_check(spin, SafetyEnvelope{}).size() != 1) {
    detail("100 rad/sec spec should trip exactly one violation");
    ok = false;
  }
  return ok;
}

// 3. Rendering and reparsing random specs is lossless; arbitrary bytes never
// crash the parser and always land on Ok or Rejected.
bool check_parser_properties() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(20230701);
  bool ok = true;

  for (int i = 0; i < kRoundTripSamples && ok; ++i) {
    TaskFrameSpec spec = testing::random_spec(rng);
    std::string rendered = render_function(spec, FunctionRole::source(1));
    ParseOutcome outcome = parse_generation(rendered, spec.task());
    if (!outcome.ok() ||
        outcome.spec->with_provenance(spec.provenance()) != spec) {
      detail("round trip diverged for " + spec.task().normalized);
      ok = false;
    }
  }

  std::uniform_int_distribution<int> length(0, 400);
  std::uniform_int_distribution<int> byte(0, 255);
  const TaskName target = normalize_task_name("fuzz target");
  for (int i = 0; i < kFuzzSamples && ok; ++i) {
    std::string bytes;
    int n = length(rng);
    bytes.reserve(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) bytes.push_back(static_cast<char>(byte(rng)));
    try {
      ParseOutcome outcome = parse_generation(bytes, target);
      if (outcome.ok() == outcome.reason.has_value()) {
        detail("fuzz outcome is neither ok nor rejected");
        ok = false;
      }
    } catch (...) {
      detail("parser threw on random bytes");
      ok = false;
    }
  }

  // byte-level mutations of valid renders reach the deeper parse branches
  for (int i = 0; i < kMutationSamples && ok; ++i) {
    TaskFrameSpec spec = testing::random_spec(rng);
    std::string text = render_function(spec, FunctionRole::source(1));
    std::uniform_int_distribution<size_t> pos(0, text.size() - 1);
    std::uniform_int_distribution<int> edits(1, 6);
    for (int e = edits(rng); e > 0; --e) text[pos(rng)] = static_cast<char>(byte(rng));
    try {
      ParseOutcome outcome = parse_generation(text, spec.task());
      if (outcome.ok() == outcome.reason.has_value()) {
        detail("mutated outcome is neither ok nor rejected");
        ok = false;
      }
    } catch (...) {
      detail("parser threw on mutated render");
      ok = false;
    }
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= kParserBudgetSeconds) {
    detail("parser properties took " + std::to_string(elapsed) + " s");
    ok = false;
  }
  return ok;
}

// 4. A reply that only repeats the source calls is rejected as such.
bool check_degenerate_generation() {
  std::string calls;
  for (const TaskFrameSpec& source : SourceLibrary::builtin().sources()) {
    calls += source.task().normalized + "()\n";
  }
  ParseOutcome outcome = parse_generation(calls, normalize_task_name("cut pizza"));
  return !outcome.ok() && outcome.reason == ParseReason::RepeatedSourceCalls;
}

// 5. Thirty rules load with acyclic aliases and class-level verdicts are
// invariant under axis relabelings.
bool check_rule_integrity() {
  bool ok = true;
  const RuleSet& rules = RuleSet::builtin();
  if (rules.rules().size() != 30) {
    detail("expected 30 rules, got " + std::to_string(rules.rules().size()));
    ok = false;
  }
  try {
    RuleSet expanded = RuleSet::from_json_text(canonical_rules_json_text());
    for (const MetricRule& rule : expanded.rules()) {
      if (rule.alternatives.empty() || rule.alternatives.front().empty()) {
        detail("rule " + std::to_string(rule.task_no) + " expanded to nothing");
        ok = false;
      }
    }
  } catch (const Error& err) {
    detail(std::string("alias expansion failed: ") + err.what());
    ok = false;
  }

  std::mt19937 rng(20230702);
  std::uniform_int_distribution<int> task_pick(1, 30);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < kPermutationTrials && ok; ++trial) {
    TaskFrameSpec spec = testing::random_spec(rng);
    const MetricRule& rule = rules.rule(task_pick(rng));
    std::array<Axis, 6> mapping = testing::random_axis_relabeling(rng);

    std::map<int, TaskFrameSpec> context;
    std::map<int, TaskFrameSpec> permuted_context;
    for (int reference : {4, 7, 29}) {
      if (coin(rng)) {
        TaskFrameSpec ref_spec = testing::random_spec(rng);
        context.emplace(reference, ref_spec);
        permuted_context.emplace(reference, testing::permute_axes(ref_spec, mapping));
      }
    }

    Verdict base = validate(spec, rule, context);
    Verdict moved = validate(testing::permute_axes(spec, mapping), rule,
                             permuted_context);
    if (base.correct != moved.correct ||
        base.failed_predicates != moved.failed_predicates) {
      detail("verdict changed under relabeling for rule " +
             std::to_string(rule.task_no) + " on trial " + std::to_string(trial));
      ok = false;
    }
  }
  return ok;
}

// 6. The screw-turning demo converges on the pressing surface and is stable
// against halving the integration step.
bool check_simulator_convergence() {
  const auto start = std::chrono::steady_clock::now();
  const TaskFrameSpec& screw = SourceLibrary::builtin().sources()[0];
  const EnvironmentModel desk = EnvironmentModel::desk_default();

  SimTrace trace = simulate(screw, desk, ControlGains{}, 2.0, 1e-3);
  const AxisSample tz = trace.samples.back()[static_cast<size_t>(Axis::TZ)];
  const AxisSample rz = trace.samples.back()[static_cast<size_t>(Axis::RZ)];
  bool ok = true;
  if (std::abs(tz.measured - (-5.0)) / 5.0 >= kConvergenceTolerance) {
    detail("contact force at t=2 is " + std::to_string(tz.measured));
    ok = false;
  }
  if (std::abs(rz.rate - 5.0) / 5.0 >= kConvergenceTolerance) {
    detail("angular rate at t=2 is " + std::to_string(rz.rate));
    ok = false;
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= kSimBudgetSeconds) {
    detail("simulation took " + std::to_string(elapsed) + " s");
    ok = false;
  }

  SimTrace halved = simulate(screw, desk, ControlGains{}, 2.0, 5e-4);
  for (Axis axis : {Axis::TZ, Axis::RZ}) {
    const AxisSample& full = trace.samples.back()[static_cast<size_t>(axis)];
    const AxisSample& half = halved.samples.back()[static_cast<size_t>(axis)];
    const double fields[][2] = {{full.position, half.position},
                                {full.rate, half.rate},
                                {full.measured, half.measured}};
    for (const auto& pair : fields) {
      const double scale = std::max(std::abs(pair[0]), 1e-9);
      if (std::abs(pair[1] - pair[0]) / scale >= kDtHalvingTolerance) {
        detail("dt halving moved a final state from " + std::to_string(pair[0]) +
               " to " + std::to_string(pair[1]));
        ok = false;
      }
    }
  }
  return ok;
}

// 7. Prompts match the checked-in golden files and the n-shot prefix layout.
bool check_prompt_fidelity() {
  const SourceLibrary& library = SourceLibrary::builtin();
  const TaskName pizza = normalize_task_name("cut pizza");
  bool ok = true;

  std::map<int, std::string> prompts;
  for (int shots : {0, 1, 3, 5}) {
    prompts[shots] = build_nshot_prompt(library, pizza, shots).text;
    std::string golden = read_file(
        source_path("tests/golden/prompt_cut_pizza_" + std::to_string(shots) +
                    "shot.txt"));
    if (prompts[shots] != golden) {
      detail(std::to_string(shots) + "-shot prompt diverges from its golden file");
      ok = false;
    }
  }

  size_t previous = 0;
  for (int k = 1; k <= 5; ++k) {
    size_t at = prompts[5].find("# Source function " + std::to_string(k));
    if (at == std::string::npos || (k > 1 && at <= previous)) {
      detail("source block " + std::to_string(k) + " missing or out of order");
      ok = false;
      break;
    }
    previous = at;
  }

  for (int shots : {1, 3}) {
    size_t target_at = prompts[shots].find("# Target function");
    if (target_at == std::string::npos ||
        prompts[5].compare(0, target_at, prompts[shots], 0, target_at) != 0) {
      detail(std::to_string(shots) + "-shot prompt is not a prefix of the 5-shot one");
      ok = false;
    }
  }

  std::string question = build_primitiveness_prompt(normalize_task_name("open bottle"));
  if (question != read_file(source_path("tests/golden/primitiveness_open_bottle.txt"))) {
    detail("primitiveness prompt diverges from its golden file");
    ok = false;
  }
  return ok;
}

// 8. A live round trip recorded through an injected transport replays byte-
// identically with the network seam blocked.
bool check_record_replay_transport() {
  class CannedTransport : public Transport {
   public:
    explicit CannedTransport(std::string body) : body_(std::move(body)) {}
    std::optional<HttpResponse> post_json(const std::string&, const std::string&,
                                          const std::string&, double) override {
      return HttpResponse{200, body_};
    }

   private:
    std::string body_;
  };

  class BlockedTransport : public Transport {
   public:
    bool touched = false;
    std::optional<HttpResponse> post_json(const std::string&, const std::string&,
                                          const std::string&, double) override {
      touched = true;
      return std::nullopt;
    }
  };

  const std::string completion =
      "def cut_pizza(translational_x=0, translational_y=0, translational_z=0, "
      "angular_x=0, angular_y=0, angular_z=0):\n"
      "  # Coordinate setting: z axis points down into the pizza\n"
      "  translational_x = 5  # cm/sec\n"
      "  translational_y = 0\n"
      "  translational_z = -5  # N\n"
      "  angular_x = 0\n"
      "  angular_y = 0\n"
      "  angular_z = 0\n";
  nlohmann::json choice = {{"message", {{"content", completion}}}};
  const std::string body =
      nlohmann::json{{"choices", nlohmann::json::array({choice})}}.dump();

  fs::path fixture = fs::temp_directory_path() / "tff_acceptance_transport.jsonl";
  fs::remove(fixture);
  setenv("OPENAI_API_KEY", "acceptance-key", 1);

  ClientOptions options;
  options.backoff_base_seconds = 0.0;
  options.fixture_path = fixture.string();

  bool ok = true;
  const std::string prompt =
      build_nshot_prompt(SourceLibrary::builtin(), normalize_task_name("cut pizza"), 5)
          .text;
  {
    Client recorder(Backend::Record, options,
                    std::make_unique<CannedTransport>(body));
    if (recorder.complete(prompt, ModelConfig::preset("gpt-4")) != completion) {
      detail("recorded completion did not match the canned transport body");
      ok = false;
    }
  }

  auto blocked = std::make_unique<BlockedTransport>();
  BlockedTransport* sentinel = blocked.get();
  Client replayer(Backend::Replay, options, std::move(blocked));
  if (replayer.complete(prompt, ModelConfig::preset("gpt-4")) != completion) {
    detail("replayed completion differs from the recorded bytes");
    ok = false;
  }
  if (sentinel->touched) {
    detail("replay touched the transport");
    ok = false;
  }

  unsetenv("OPENAI_API_KEY");
  fs::remove(fixture);
  return ok;
}

}  // namespace

int main() {
  report(1, check_table_reproduction(),
         "five-shot replay benchmark rates are 0.67 / 0.83 / 0.70 / 0.13 within 5 s");
  report(2, check_recorded_failure_cases(),
         "validator settles the straw, childproof-cap, hammer and runaway-spin cases");
  report(3, check_parser_properties(),
         "200 rendered specs reparse equal and 12000 fuzz inputs never crash within 30 s");
  report(4, check_degenerate_generation(),
         "a completion of bare source calls is rejected as repeated_source_calls");
  report(5, check_rule_integrity(),
         "30 rules load, aliases expand acyclically, verdicts survive 1000 relabelings");
  report(6, check_simulator_convergence(),
         "turn_screw reaches -5 N and 5 rad/sec within 1% by t=2 s and dt halving moves finals under 0.5%");
  report(7, check_prompt_fidelity(),
         "n-shot and primitiveness prompts match their golden files and prefix layout");
  report(8, check_record_replay_transport(),
         "a recorded live round trip replays byte-identically without the network");
  return g_failures == 0 ? 0 : 1;
}
