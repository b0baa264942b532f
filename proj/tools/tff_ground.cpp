// Command-line front end. Talks to the toolkit exclusively through the C API
// in tffground/tffground.h; all structured data crosses as JSON text.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tffground/tffground.h"

namespace {

// Owns one string returned by the library.
struct ApiString {
  char* value = nullptr;
  ~ApiString() { tff_string_free(value); }
};

struct CtxGuard {
  tff_ctx* ctx = nullptr;
  ~CtxGuard() { tff_ctx_destroy(ctx); }
};

int fail(const tff_ctx* ctx, tff_status status) {
  std::cerr << "error (" << tff_status_name(status) << "): " << tff_last_error(ctx)
            << "\n";
  return 1;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string read_stdin() {
  std::ostringstream buffer;
  buffer << std::cin.rdbuf();
  return buffer.str();
}

const char* opt_cstr(const std::string& value) {
  return value.empty() ? nullptr : value.c_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounds natural-language primitive tasks to task-frame set-points"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config file (library/rules paths, envelope, gains, endpoints)");

  auto* prompt_cmd = app.add_subcommand("prompt", "Print the prompt for a task");
  std::string prompt_task;
  int prompt_shots = 5;
  bool prompt_gate = false;
  prompt_cmd->add_option("task", prompt_task, "task name, e.g. \"cut pizza\"")->required();
  prompt_cmd->add_option("--shots", prompt_shots, "source functions to include (0-5)");
  prompt_cmd->add_flag("--primitiveness", prompt_gate,
                       "print the primitiveness question instead");

  auto* ground_cmd = app.add_subcommand("ground", "Ground one task through an LLM");
  std::string ground_task, ground_model = "gpt-4", ground_backend = "replay";
  std::string ground_fixtures, ground_out;
  int ground_shots = 5;
  bool ground_gate = false;
  ground_cmd->add_option("task", ground_task, "task name")->required();
  ground_cmd->add_option("--model", ground_model, "model id (default gpt-4)");
  ground_cmd->add_option("--shots", ground_shots, "source functions in the prompt");
  ground_cmd->add_option("--backend", ground_backend, "live, record or replay");
  ground_cmd->add_option("--fixtures", ground_fixtures, "completion fixture JSONL");
  ground_cmd->add_flag("--check-primitive", ground_gate,
                       "ask the primitiveness question first");
  ground_cmd->add_option("--out", ground_out, "write the result JSON here instead of stdout");

  auto* parse_cmd = app.add_subcommand("parse", "Parse completion text into a spec");
  std::string parse_task, parse_file;
  parse_cmd->add_option("task", parse_task, "target task name")->required();
  parse_cmd->add_option("--file", parse_file, "completion text file (stdin when omitted)");

  auto* validate_cmd =
      app.add_subcommand("validate", "Judge a spec against a catalog requirement");
  std::string validate_spec, validate_context;
  int validate_task_no = 0;
  validate_cmd->add_option("--spec", validate_spec, "spec JSON file")->required();
  validate_cmd->add_option("--task-no", validate_task_no, "catalog task number (1-30)")
      ->required();
  validate_cmd->add_option("--context", validate_context,
                           "JSON file mapping task numbers to earlier specs");

  auto* simulate_cmd = app.add_subcommand("simulate", "Run a spec in the simulator");
  std::string sim_spec, sim_env, sim_trace;
  double sim_duration = 5.0, sim_dt = 0.001;
  bool sim_unsafe = false;
  simulate_cmd->add_option("--spec", sim_spec, "spec JSON file")->required();
  simulate_cmd->add_option("--env", sim_env, "environment JSON file (free space when omitted)");
  simulate_cmd->add_option("--duration", sim_duration, "seconds to simulate");
  simulate_cmd->add_option("--dt", sim_dt, "integration step in seconds");
  simulate_cmd->add_flag("--allow-unsafe", sim_unsafe,
                         "run even when set-points break the safety envelope");
  simulate_cmd->add_option("--trace", sim_trace, "write the full trace CSV here");

  auto* eval_cmd = app.add_subcommand("eval", "Run the 30-task benchmark");
  std::string eval_model, eval_backend = "replay", eval_fixtures, eval_out;
  int eval_shots = 5;
  eval_cmd->add_option("--model", eval_model, "model id")->required();
  eval_cmd->add_option("--shots", eval_shots, "source functions in the prompt");
  eval_cmd->add_option("--backend", eval_backend, "live, record or replay");
  eval_cmd->add_option("--fixtures", eval_fixtures, "completion fixture JSONL");
  eval_cmd->add_option("--out", eval_out, "persist the run as JSONL here");

  auto* report_cmd = app.add_subcommand("report", "Render persisted benchmark runs");
  std::vector<std::string> report_paths;
  std::string report_style = "rates";
  report_cmd->add_option("runs", report_paths, "run JSONL files")->required();
  report_cmd->add_option("--style", report_style, "rates, dots or json");

  CLI11_PARSE(app, argc, argv);

  std::string config_text = "{}";
  if (!config_path.empty()) {
    std::optional<std::string> text = read_file(config_path);
    if (!text) {
      std::cerr << "error: cannot read config file " << config_path << "\n";
      return 1;
    }
    config_text = *text;
  }

  CtxGuard guard;
  tff_status status = tff_ctx_create(config_text.c_str(), &guard.ctx);
  if (status != TFF_OK) return fail(nullptr, status);
  tff_ctx* ctx = guard.ctx;

  if (prompt_cmd->parsed()) {
    ApiString text;
    status = prompt_gate
                 ? tff_build_primitiveness_prompt(ctx, prompt_task.c_str(), &text.value)
                 : tff_build_nshot_prompt(ctx, prompt_task.c_str(), prompt_shots,
                                          &text.value);
    if (status != TFF_OK) return fail(ctx, status);
    std::cout << text.value;
    return 0;
  }

  if (ground_cmd->parsed()) {
    ApiString result;
    status = tff_ground_task(ctx, ground_task.c_str(), ground_shots,
                             ground_model.c_str(), ground_backend.c_str(),
                             opt_cstr(ground_fixtures), ground_gate ? 1 : 0,
                             &result.value);
    if (status != TFF_OK) return fail(ctx, status);
    if (ground_out.empty()) {
      std::cout << result.value << "\n";
    } else {
      std::ofstream out(ground_out, std::ios::binary);
      out << result.value << "\n";
      if (!out) {
        std::cerr << "error: cannot write " << ground_out << "\n";
        return 1;
      }
    }
    return 0;
  }

  if (parse_cmd->parsed()) {
    std::string completion;
    if (parse_file.empty()) {
      completion = read_stdin();
    } else {
      std::optional<std::string> text = read_file(parse_file);
      if (!text) {
        std::cerr << "error: cannot read " << parse_file << "\n";
        return 1;
      }
      completion = *text;
    }
    ApiString outcome;
    status = tff_parse_generation(ctx, completion.c_str(), parse_task.c_str(),
                                  &outcome.value);
    if (status != TFF_OK) return fail(ctx, status);
    std::cout << outcome.value << "\n";
    return 0;
  }

  if (validate_cmd->parsed()) {
    std::optional<std::string> spec_text = read_file(validate_spec);
    if (!spec_text) {
      std::cerr << "error: cannot read " << validate_spec << "\n";
      return 1;
    }
    std::string context_text = "{}";
    if (!validate_context.empty()) {
      std::optional<std::string> text = read_file(validate_context);
      if (!text) {
        std::cerr << "error: cannot read " << validate_context << "\n";
        return 1;
      }
      context_text = *text;
    }
    ApiString verdict;
    status = tff_validate_spec(ctx, spec_text->c_str(), validate_task_no,
                               context_text.c_str(), &verdict.value);
    if (status != TFF_OK) return fail(ctx, status);
    std::cout << verdict.value << "\n";
    return 0;
  }

  if (simulate_cmd->parsed()) {
    std::optional<std::string> spec_text = read_file(sim_spec);
    if (!spec_text) {
      std::cerr << "error: cannot read " << sim_spec << "\n";
      return 1;
    }
    std::string env_text;
    if (!sim_env.empty()) {
      std::optional<std::string> text = read_file(sim_env);
      if (!text) {
        std::cerr << "error: cannot read " << sim_env << "\n";
        return 1;
      }
      env_text = *text;
    }
    ApiString summary;
    status = tff_simulate(ctx, spec_text->c_str(), opt_cstr(env_text), sim_duration,
                          sim_dt, sim_unsafe ? 1 : 0, opt_cstr(sim_trace),
                          &summary.value);
    if (status != TFF_OK) return fail(ctx, status);
    std::cout << summary.value;
    return 0;
  }

  if (eval_cmd->parsed()) {
    ApiString summary;
    status = tff_run_eval(ctx, eval_model.c_str(), eval_shots, eval_backend.c_str(),
                          opt_cstr(eval_fixtures), opt_cstr(eval_out), &summary.value);
    if (status != TFF_OK) return fail(ctx, status);
    std::cout << summary.value;
    return 0;
  }

  if (report_cmd->parsed()) {
    std::vector<const char*> paths;
    paths.reserve(report_paths.size());
    for (const std::string& path : report_paths) paths.push_back(path.c_str());
    ApiString text;
    status = tff_render_report(ctx, paths.data(), paths.size(), report_style.c_str(),
                               &text.value);
    if (status != TFF_OK) return fail(ctx, status);
    std::cout << text.value;
    return 0;
  }

  return 0;
}
