#include "tffground/tffground.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "tff/errors.hpp"
#include "tff/eval.hpp"
#include "tff/llm.hpp"
#include "tff/parser.hpp"
#include "tff/prompt.hpp"
#include "tff/rules.hpp"
#include "tff/sim.hpp"
#include "tff/spec_json.hpp"
#include "tff/types.hpp"

using nlohmann::json;

struct tff_ctx {
  tff::SourceLibrary library = tff::SourceLibrary::builtin();
  tff::RuleSet rules = tff::RuleSet::builtin();
  tff::SafetyEnvelope envelope;
  tff::ControlGains gains;
  std::map<std::string, std::string> endpoints;
  tff::ClientOptions client_defaults;
  std::string last_error;
};

namespace {

// tff_status mirrors tff::ErrorCode value for value.
static_assert(TFF_OK == static_cast<int>(tff::ErrorCode::Ok));
static_assert(TFF_SAFETY_VIOLATION == static_cast<int>(tff::ErrorCode::SafetyViolation));
static_assert(TFF_INTERNAL == static_cast<int>(tff::ErrorCode::Internal));

// Errors raised before any handle exists (tff_ctx_create) land here.
thread_local std::string g_bootstrap_error;

char* copy_string(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

template <typename Fn>
tff_status guarded(tff_ctx* ctx, Fn&& fn) {
  std::string& sink = ctx ? ctx->last_error : g_bootstrap_error;
  sink.clear();
  try {
    fn();
    return TFF_OK;
  } catch (const tff::Error& err) {
    sink = err.what();
    return static_cast<tff_status>(static_cast<int>(err.code()));
  } catch (const json::exception& err) {
    sink = err.what();
    return TFF_INVALID_ARGUMENT;
  } catch (const std::exception& err) {
    sink = err.what();
    return TFF_INTERNAL;
  }
}

json parse_json_object(const char* text, const char* what) {
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded() || !value.is_object())
    tff::raise(tff::ErrorCode::InvalidArgument,
               std::string(what) + " must be a JSON object");
  return value;
}

tff::ModelConfig resolve_model(const tff_ctx& ctx, const char* model) {
  tff::ModelConfig config = tff::ModelConfig::preset(model);
  auto it = ctx.endpoints.find(config.model_id);
  if (it != ctx.endpoints.end()) config.endpoint_url = it->second;
  return config;
}

tff::Client make_client(const tff_ctx& ctx, const char* backend,
                        const char* fixtures_path) {
  tff::ClientOptions options = ctx.client_defaults;
  options.fixture_path = fixtures_path ? fixtures_path : "";
  return tff::Client(tff::backend_from_name(backend), options);
}

json selection_to_json(const tff::SelectionAssignment& assignment) {
  json axes = json::object();
  for (tff::Axis axis : tff::kAllAxes) {
    const tff::AxisSelection& selection = assignment.axis(axis);
    json entry;
    entry["kind"] = std::string(tff::selection_kind_name(selection.kind));
    if (selection.kind != tff::AxisSelection::Kind::Off) {
      entry["setpoint"] = selection.setpoint;
      entry["unit"] = std::string(tff::unit_token(selection.unit));
      entry["setpoint_si"] = selection.setpoint_si();
    }
    axes[std::string(tff::axis_param_name(axis))] = entry;
  }
  return axes;
}

json violations_to_json(const std::vector<tff::SafetyViolation>& violations) {
  tff::Verdict screen;
  screen.correct = true;
  screen.safety_violations = violations;
  return tff::verdict_to_json(screen)["safety_violations"];
}

}  // namespace

tff_status tff_ctx_create(const char* config_json, tff_ctx** out_ctx) {
  if (!out_ctx) return TFF_INVALID_ARGUMENT;
  *out_ctx = nullptr;
  auto ctx = std::make_unique<tff_ctx>();
  tff_status status = guarded(nullptr, [&] {
    if (!config_json || !*config_json) return;
    json config = parse_json_object(config_json, "config");
    if (config.contains("library_path"))
      ctx->library = tff::load_source_library(config["library_path"].get<std::string>());
    if (config.contains("rules_path"))
      ctx->rules = tff::RuleSet::load(config["rules_path"].get<std::string>());
    if (config.contains("envelope"))
      ctx->envelope = tff::envelope_from_json(config["envelope"]);
    if (config.contains("gains")) {
      const json& gains = config["gains"];
      ctx->gains.force_kp = gains.value("force_kp", ctx->gains.force_kp);
      ctx->gains.force_ki = gains.value("force_ki", ctx->gains.force_ki);
      ctx->gains.velocity_kp = gains.value("velocity_kp", ctx->gains.velocity_kp);
      ctx->gains.position_kp = gains.value("position_kp", ctx->gains.position_kp);
      ctx->gains.position_kd = gains.value("position_kd", ctx->gains.position_kd);
    }
    if (config.contains("endpoints"))
      for (const auto& [model, url] : config["endpoints"].items())
        ctx->endpoints[model] = url.get<std::string>();
    ctx->client_defaults.max_attempts =
        config.value("max_attempts", ctx->client_defaults.max_attempts);
    ctx->client_defaults.backoff_base_seconds =
        config.value("backoff_base_seconds", ctx->client_defaults.backoff_base_seconds);
    ctx->client_defaults.max_concurrent_requests =
        config.value("max_concurrent_requests", ctx->client_defaults.max_concurrent_requests);
  });
  if (status != TFF_OK) return status;
  *out_ctx = ctx.release();
  return TFF_OK;
}

void tff_ctx_destroy(tff_ctx* ctx) { delete ctx; }

const char* tff_last_error(const tff_ctx* ctx) {
  return ctx ? ctx->last_error.c_str() : g_bootstrap_error.c_str();
}

const char* tff_status_name(tff_status status) {
  if (status < TFF_OK || status > TFF_INTERNAL) return "unknown";
  return tff::error_code_name(static_cast<tff::ErrorCode>(static_cast<int>(status)));
}

void tff_string_free(char* text) { delete[] text; }

tff_status tff_normalize_task_name(tff_ctx* ctx, const char* raw, char** out_name) {
  if (!ctx || !raw || !out_name) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    *out_name = copy_string(tff::normalize_task_name(raw).normalized);
  });
}

tff_status tff_classify_unit(tff_ctx* ctx, const char* unit_token,
                             const char* axis, char** out_mode) {
  if (!ctx || !unit_token || !axis || !out_mode) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    static const std::map<std::string, tff::Axis> kShortNames = {
        {"tx", tff::Axis::TX}, {"ty", tff::Axis::TY}, {"tz", tff::Axis::TZ},
        {"rx", tff::Axis::RX}, {"ry", tff::Axis::RY}, {"rz", tff::Axis::RZ}};
    std::optional<tff::Axis> parsed = tff::axis_from_param_name(axis);
    if (!parsed) {
      auto it = kShortNames.find(axis);
      if (it == kShortNames.end())
        tff::raise(tff::ErrorCode::InvalidArgument,
                   std::string("unknown axis '") + axis + "'");
      parsed = it->second;
    }
    std::optional<tff::ControlMode> mode = tff::classify_unit(unit_token, *parsed);
    if (!mode)
      tff::raise(tff::ErrorCode::UnknownUnit,
                 std::string("unit '") + unit_token + "' has no control mode on axis " +
                     std::string(tff::axis_param_name(*parsed)));
    *out_mode = copy_string(std::string(tff::control_mode_name(*mode)));
  });
}

tff_status tff_build_primitiveness_prompt(tff_ctx* ctx, const char* task,
                                          char** out_prompt) {
  if (!ctx || !task || !out_prompt) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    *out_prompt = copy_string(
        tff::build_primitiveness_prompt(tff::normalize_task_name(task)));
  });
}

tff_status tff_interpret_primitiveness_reply(tff_ctx* ctx, const char* reply,
                                             int* out_answer) {
  if (!ctx || !reply || !out_answer) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    switch (tff::interpret_primitiveness_reply(reply)) {
      case tff::PrimitivenessAnswer::Yes: *out_answer = 1; break;
      case tff::PrimitivenessAnswer::No: *out_answer = 0; break;
      case tff::PrimitivenessAnswer::Ambiguous: *out_answer = -1; break;
    }
  });
}

tff_status tff_build_nshot_prompt(tff_ctx* ctx, const char* task, int shots,
                                  char** out_prompt) {
  if (!ctx || !task || !out_prompt) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    tff::PromptBundle bundle =
        tff::build_nshot_prompt(ctx->library, tff::normalize_task_name(task), shots);
    *out_prompt = copy_string(bundle.text);
  });
}

tff_status tff_render_function(tff_ctx* ctx, const char* spec_json,
                               int source_index, char** out_text) {
  if (!ctx || !spec_json || !out_text) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    if (source_index < 0)
      tff::raise(tff::ErrorCode::InvalidArgument, "source_index must be >= 0");
    tff::TaskFrameSpec spec = tff::spec_from_json(parse_json_object(spec_json, "spec"));
    tff::FunctionRole role = source_index >= 1 ? tff::FunctionRole::source(source_index)
                                               : tff::FunctionRole::target();
    *out_text = copy_string(tff::render_function(spec, role));
  });
}

tff_status tff_parse_generation(tff_ctx* ctx, const char* completion,
                                const char* task, char** out_outcome_json) {
  if (!ctx || !completion || !task || !out_outcome_json) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    tff::ParseOutcome outcome =
        tff::parse_generation(completion, tff::normalize_task_name(task));
    *out_outcome_json = copy_string(tff::parse_outcome_to_json(outcome).dump(2));
  });
}

tff_status tff_validate_spec(tff_ctx* ctx, const char* spec_json, int task_no,
                             const char* context_json, char** out_verdict_json) {
  if (!ctx || !spec_json || !out_verdict_json) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    tff::TaskFrameSpec spec = tff::spec_from_json(parse_json_object(spec_json, "spec"));
    const tff::MetricRule& rule = ctx->rules.rule(task_no);
    std::map<int, tff::TaskFrameSpec> context;
    if (context_json && *context_json) {
      json entries = parse_json_object(context_json, "context");
      for (const auto& [key, value] : entries.items()) {
        size_t used = 0;
        int reference = std::stoi(key, &used);
        if (used != key.size())
          tff::raise(tff::ErrorCode::InvalidArgument,
                     "context keys must be task numbers, got '" + key + "'");
        context.emplace(reference, tff::spec_from_json(value));
      }
    }
    tff::Verdict verdict = tff::validate(spec, rule, context, ctx->envelope);
    *out_verdict_json = copy_string(tff::verdict_to_json(verdict).dump(2));
  });
}

tff_status tff_safety_check(tff_ctx* ctx, const char* spec_json,
                            char** out_violations_json) {
  if (!ctx || !spec_json || !out_violations_json) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    tff::TaskFrameSpec spec = tff::spec_from_json(parse_json_object(spec_json, "spec"));
    *out_violations_json =
        copy_string(violations_to_json(tff::safety_check(spec, ctx->envelope)).dump(2));
  });
}

tff_status tff_complete(tff_ctx* ctx, const char* prompt, const char* model,
                        const char* backend, const char* fixtures_path,
                        char** out_completion) {
  if (!ctx || !prompt || !model || !backend || !out_completion)
    return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    tff::ModelConfig config = resolve_model(*ctx, model);
    tff::Client client = make_client(*ctx, backend, fixtures_path);
    *out_completion = copy_string(client.complete(prompt, config));
  });
}

tff_status tff_ground_task(tff_ctx* ctx, const char* task, int shots,
                           const char* model, const char* backend,
                           const char* fixtures_path, int check_primitive,
                           char** out_json) {
  if (!ctx || !task || !model || !backend || !out_json) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    tff::TaskName target = tff::normalize_task_name(task);
    tff::ModelConfig config = resolve_model(*ctx, model);
    tff::Client client = make_client(*ctx, backend, fixtures_path);

    json out;
    out["task"] = target.normalized;
    out["model"] = config.model_id;
    out["shots"] = shots;

    if (check_primitive) {
      std::string gate_prompt = tff::build_primitiveness_prompt(target);
      std::string reply = client.complete(gate_prompt, config);
      tff::PrimitivenessAnswer answer = tff::interpret_primitiveness_reply(reply);
      out["primitive_check"] = {
          {"prompt", gate_prompt},
          {"reply", reply},
          {"answer", std::string(tff::primitiveness_answer_name(answer))}};
      if (answer == tff::PrimitivenessAnswer::No) {
        out["grounded"] = false;
        *out_json = copy_string(out.dump(2));
        return;
      }
    }

    tff::PromptBundle bundle = tff::build_nshot_prompt(ctx->library, target, shots);
    std::string completion = client.complete(bundle.text, config);
    tff::ParseOutcome outcome = tff::parse_generation(completion, target);
    if (outcome.spec)
      outcome.spec = outcome.spec->with_provenance(
          tff::Provenance::generated(config.model_id, shots));

    out["prompt"] = bundle.text;
    out["completion"] = completion;
    out["parse"] = tff::parse_outcome_to_json(outcome);
    out["grounded"] = outcome.ok();
    if (outcome.spec) {
      out["safety_violations"] =
          violations_to_json(tff::safety_check(*outcome.spec, ctx->envelope));
      out["selection"] = selection_to_json(tff::spec_to_selection(*outcome.spec));
    }
    *out_json = copy_string(out.dump(2));
  });
}

tff_status tff_run_eval(tff_ctx* ctx, const char* model, int shots,
                        const char* backend, const char* fixtures_path,
                        const char* out_path, char** out_summary_json) {
  if (!ctx || !model || !backend) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    tff::ModelConfig config = resolve_model(*ctx, model);
    tff::Client client = make_client(*ctx, backend, fixtures_path);
    tff::EvalRun run =
        tff::run_eval(client, config, shots, ctx->library, ctx->rules, ctx->envelope);
    if (out_path && *out_path) tff::persist_run(run, out_path);
    if (out_summary_json)
      *out_summary_json =
          copy_string(tff::render_report({run}, tff::ReportStyle::Json));
  });
}

tff_status tff_render_report(tff_ctx* ctx, const char* const* run_paths,
                             size_t run_count, const char* style,
                             char** out_text) {
  if (!ctx || !run_paths || run_count == 0 || !style || !out_text)
    return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    std::vector<tff::EvalRun> runs;
    runs.reserve(run_count);
    for (size_t i = 0; i < run_count; ++i) {
      if (!run_paths[i])
        tff::raise(tff::ErrorCode::InvalidArgument, "null run path");
      runs.push_back(tff::load_run(run_paths[i]));
    }
    *out_text = copy_string(tff::render_report(runs, tff::report_style_from_name(style)));
  });
}

tff_status tff_spec_to_selection(tff_ctx* ctx, const char* spec_json,
                                 char** out_selection_json) {
  if (!ctx || !spec_json || !out_selection_json) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    tff::TaskFrameSpec spec = tff::spec_from_json(parse_json_object(spec_json, "spec"));
    *out_selection_json =
        copy_string(selection_to_json(tff::spec_to_selection(spec)).dump(2));
  });
}

tff_status tff_simulate(tff_ctx* ctx, const char* spec_json, const char* env_json,
                        double duration, double dt, int allow_unsafe,
                        const char* trace_csv_path, char** out_summary_json) {
  if (!ctx || !spec_json || !out_summary_json) return TFF_INVALID_ARGUMENT;
  return guarded(ctx, [&] {
    tff::TaskFrameSpec spec = tff::spec_from_json(parse_json_object(spec_json, "spec"));
    tff::EnvironmentModel env = env_json && *env_json
                                    ? tff::environment_from_json_text(env_json)
                                    : tff::EnvironmentModel::free_space();

    std::vector<tff::SafetyViolation> violations = tff::safety_check(spec, ctx->envelope);
    if (!violations.empty() && !allow_unsafe) {
      std::string message = "set-point outside safety envelope:";
      for (const tff::SafetyViolation& violation : violations)
        message += " " + std::string(tff::axis_param_name(violation.axis)) + "=" +
                   tff::format_number(violation.value) + " exceeds " + violation.limit +
                   "=" + tff::format_number(violation.bound) + ";";
      message.pop_back();
      tff::raise(tff::ErrorCode::SafetyViolation, message);
    }

    tff::SelectionAssignment assignment = tff::spec_to_selection(spec);
    tff::SimTrace trace =
        tff::simulate_selection(assignment, env, ctx->gains, duration, dt);
    if (trace_csv_path && *trace_csv_path) {
      std::ofstream out(trace_csv_path, std::ios::binary);
      out << tff::trace_to_csv(trace);
      if (!out)
        tff::raise(tff::ErrorCode::IoError,
                   std::string("cannot write trace to ") + trace_csv_path);
    }
    *out_summary_json = copy_string(tff::trace_summary_json_text(trace, assignment));
  });
}
