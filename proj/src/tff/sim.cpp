#include "tff/sim.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tff {

namespace {

using nlohmann::json;

constexpr double kDivergenceBound = 1e6;
constexpr size_t kMinTraceSamples = 10;

// Contact coefficients in SI. Translational stiffness N/cm -> N/m, damping
// N*s/cm -> N*s/m; angular coefficients are already SI.
double contact_coeff_si(double value, Axis axis) {
  return is_translational(axis) ? value / kMetersPerCentimeter : value;
}

void validate_environment(const EnvironmentModel& env) {
  for (Axis axis : kAllAxes) {
    const AxisContact& c = env.contact(axis);
    if (c.stiffness < 0 || c.damping < 0) {
      raise(ErrorCode::InvalidArgument,
            "contact coefficients must be non-negative on " +
                std::string(axis_param_name(axis)));
    }
  }
}

}  // namespace

double to_si(double value, Unit unit) {
  switch (unit) {
    case Unit::Centimeter:
    case Unit::CmPerSec:
      return value * kMetersPerCentimeter;
    default:
      return value;  // N, Nm, rad, rad/sec are SI already
  }
}

std::string_view selection_kind_name(AxisSelection::Kind kind) {
  switch (kind) {
    case AxisSelection::Kind::Off: return "off";
    case AxisSelection::Kind::Force: return "force";
    case AxisSelection::Kind::Velocity: return "velocity";
    case AxisSelection::Kind::Position: return "position";
  }
  return "";
}

SelectionAssignment spec_to_selection(const TaskFrameSpec& spec) {
  SelectionAssignment assignment;
  for (Axis axis : kAllAxes) {
    const AxisDirective& d = spec.directive(axis);
    AxisSelection& sel = assignment.axes[static_cast<size_t>(axis)];
    sel.setpoint = d.value;
    sel.unit = d.unit;
    switch (d.mode) {
      case ControlMode::Inactive:
        sel.kind = AxisSelection::Kind::Off;
        break;
      case ControlMode::Force:
        sel.kind = AxisSelection::Kind::Force;
        break;
      case ControlMode::PositionVelocity:
        sel.kind = is_rate_unit(d.unit) ? AxisSelection::Kind::Velocity
                                        : AxisSelection::Kind::Position;
        break;
    }
  }
  return assignment;
}

EnvironmentModel EnvironmentModel::free_space() {
  EnvironmentModel env;
  env.name = "free_space";
  return env;
}

EnvironmentModel EnvironmentModel::desk_default() {
  EnvironmentModel env;
  env.name = "desk_default";
  env.contacts[static_cast<size_t>(Axis::TZ)] = AxisContact{true, 100.0, 0.2};
  return env;
}

EnvironmentModel environment_from_json_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorCode::InvalidArgument,
          std::string("environment file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    raise(ErrorCode::InvalidArgument, "environment must be a JSON object");
  }
  EnvironmentModel env;
  env.name = doc.value("name", std::string{"unnamed"});
  if (doc.contains("axes")) {
    if (!doc["axes"].is_object()) {
      raise(ErrorCode::InvalidArgument, "environment axes must be an object");
    }
    for (const auto& [key, entry] : doc["axes"].items()) {
      auto axis = axis_from_param_name(key);
      if (!axis) {
        raise(ErrorCode::InvalidArgument, "unknown axis \"" + key + "\"");
      }
      AxisContact contact;
      contact.engaged = entry.value("engaged", false);
      contact.stiffness = entry.value("stiffness", 0.0);
      contact.damping = entry.value("damping", 0.0);
      env.contacts[static_cast<size_t>(*axis)] = contact;
    }
  }
  validate_environment(env);
  return env;
}

EnvironmentModel load_environment(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open environment file " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return environment_from_json_text(buffer.str());
}

std::string environment_to_json_text(const EnvironmentModel& env) {
  validate_environment(env);
  json axes = json::object();
  for (Axis axis : kAllAxes) {
    const AxisContact& c = env.contact(axis);
    if (!c.engaged && c.stiffness == 0 && c.damping == 0) continue;
    axes[std::string(axis_param_name(axis))] = {{"engaged", c.engaged},
                                                {"stiffness", c.stiffness},
                                                {"damping", c.damping}};
  }
  json doc = {{"name", env.name}, {"axes", std::move(axes)}};
  return doc.dump(2) + "\n";
}

SimTrace simulate_selection(const SelectionAssignment& assignment,
                            const EnvironmentModel& env, const ControlGains& gains,
                            double duration, double dt) {
  if (!(dt > 0) || !(duration >= dt)) {
    raise(ErrorCode::InvalidArgument, "need dt > 0 and duration >= dt");
  }
  validate_environment(env);

  const auto steps = static_cast<size_t>(std::llround(duration / dt));

  struct AxisState {
    double x = 0, v = 0, integ = 0;
  };
  std::array<AxisState, 6> states{};

  SimTrace trace;
  trace.dt = dt;
  trace.time.reserve(steps + 1);
  trace.samples.reserve(steps + 1);

  auto measured_force = [&](Axis axis, const AxisState& s) {
    const AxisContact& c = env.contact(axis);
    if (!c.engaged) return 0.0;
    // Reaction is -(k*x + b*v); the sensor reports the force the tool applies
    // onto the environment, the negation of the reaction.
    return contact_coeff_si(c.stiffness, axis) * s.x +
           contact_coeff_si(c.damping, axis) * s.v;
  };

  auto command = [&](Axis axis, AxisState& s, double step_dt) {
    const AxisSelection& sel = assignment.axis(axis);
    switch (sel.kind) {
      case AxisSelection::Kind::Off:
        return 0.0;
      case AxisSelection::Kind::Force: {
        double err = sel.setpoint_si() - measured_force(axis, s);
        s.integ += err * step_dt;
        return gains.force_kp * err + gains.force_ki * s.integ;
      }
      case AxisSelection::Kind::Velocity:
        return gains.velocity_kp * (sel.setpoint_si() - s.v);
      case AxisSelection::Kind::Position:
        return gains.position_kp * (sel.setpoint_si() - s.x) -
               gains.position_kd * s.v;
    }
    return 0.0;
  };

  auto record = [&](double t, const std::array<double, 6>& efforts) {
    trace.time.push_back(t);
    std::array<AxisSample, 6> row;
    for (Axis axis : kAllAxes) {
      auto i = static_cast<size_t>(axis);
      row[i] = AxisSample{states[i].x, states[i].v, efforts[i],
                          measured_force(axis, states[i])};
    }
    trace.samples.push_back(row);
  };

  for (size_t step = 0; step <= steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    std::array<double, 6> efforts{};
    // The final row records state only; its command is never applied, and
    // computing it would advance the force integrators once too often.
    const bool advancing = step < steps;
    for (Axis axis : kAllAxes) {
      auto i = static_cast<size_t>(axis);
      efforts[i] = advancing ? command(axis, states[i], dt)
                             : trace.samples.empty() ? 0.0 : trace.samples.back()[i].effort;
    }
    record(t, efforts);
    if (!advancing) break;

    for (Axis axis : kAllAxes) {
      auto i = static_cast<size_t>(axis);
      AxisState& s = states[i];
      const AxisContact& c = env.contact(axis);
      double reaction = c.engaged ? -(contact_coeff_si(c.stiffness, axis) * s.x +
                                      contact_coeff_si(c.damping, axis) * s.v)
                                  : 0.0;
      double accel = efforts[i] + reaction;  // unit inertia
      s.v += accel * dt;
      s.x += s.v * dt;
      if (std::abs(s.x) > kDivergenceBound || std::abs(s.v) > kDivergenceBound) {
        raise(ErrorCode::UnstableSimulation,
              std::string("state diverged on ") + std::string(axis_param_name(axis)) +
                  " at t=" + format_number(t));
      }
    }
  }
  return trace;
}

SimTrace simulate(const TaskFrameSpec& spec, const EnvironmentModel& env,
                  const ControlGains& gains, double duration, double dt) {
  return simulate_selection(spec_to_selection(spec), env, gains, duration, dt);
}

std::map<Axis, double> steady_state_error(const SimTrace& trace,
                                          const SelectionAssignment& assignment) {
  if (trace.size() < kMinTraceSamples) {
    raise(ErrorCode::TraceTooShort,
          "need at least " + std::to_string(kMinTraceSamples) + " samples, have " +
              std::to_string(trace.size()));
  }
  const size_t window = trace.size() / 10;
  const size_t begin = trace.size() - window;

  std::map<Axis, double> errors;
  for (Axis axis : kAllAxes) {
    const AxisSelection& sel = assignment.axis(axis);
    if (sel.kind == AxisSelection::Kind::Off) continue;
    double sum = 0;
    for (size_t i = begin; i < trace.size(); ++i) {
      const AxisSample& sample = trace.samples[i][static_cast<size_t>(axis)];
      switch (sel.kind) {
        case AxisSelection::Kind::Force: sum += sample.measured; break;
        case AxisSelection::Kind::Velocity: sum += sample.rate; break;
        case AxisSelection::Kind::Position: sum += sample.position; break;
        case AxisSelection::Kind::Off: break;
      }
    }
    const double mean = sum / static_cast<double>(window);
    const double sp = sel.setpoint_si();
    errors[axis] = std::abs(mean - sp) / std::max(std::abs(sp), 1e-9);
  }
  return errors;
}

std::string trace_to_csv(const SimTrace& trace) {
  std::ostringstream out;
  out << "t";
  for (Axis axis : kAllAxes) {
    std::string_view name = axis_param_name(axis);
    out << "," << name << "_pos"
        << "," << name << "_rate"
        << "," << name << "_effort"
        << "," << name << "_force";
  }
  out << "\n";
  for (size_t i = 0; i < trace.size(); ++i) {
    out << format_number(trace.time[i]);
    for (Axis axis : kAllAxes) {
      const AxisSample& s = trace.samples[i][static_cast<size_t>(axis)];
      out << "," << format_number(s.position) << "," << format_number(s.rate)
          << "," << format_number(s.effort) << "," << format_number(s.measured);
    }
    out << "\n";
  }
  return out.str();
}

std::string trace_summary_json_text(const SimTrace& trace,
                                    const SelectionAssignment& assignment) {
  json selection = json::object();
  for (Axis axis : kAllAxes) {
    const AxisSelection& sel = assignment.axis(axis);
    if (sel.kind == AxisSelection::Kind::Off) continue;
    selection[std::string(axis_param_name(axis))] = {
        {"kind", std::string(selection_kind_name(sel.kind))},
        {"setpoint", sel.setpoint},
        {"unit", std::string(unit_token(sel.unit))}};
  }

  json final_row = json::object();
  if (!trace.samples.empty()) {
    for (Axis axis : kAllAxes) {
      const AxisSample& s = trace.samples.back()[static_cast<size_t>(axis)];
      final_row[std::string(axis_param_name(axis))] = {{"position", s.position},
                                                       {"rate", s.rate},
                                                       {"effort", s.effort},
                                                       {"measured", s.measured}};
    }
  }

  json errors = json::object();
  if (trace.size() >= kMinTraceSamples) {
    for (const auto& [axis, err] : steady_state_error(trace, assignment)) {
      errors[std::string(axis_param_name(axis))] = err;
    }
  }

  json doc = {{"dt", trace.dt},
              {"duration", trace.time.empty() ? 0.0 : trace.time.back()},
              {"samples", trace.size()},
              {"selection", std::move(selection)},
              {"final", std::move(final_row)},
              {"steady_state_error", std::move(errors)}};
  return doc.dump(2) + "\n";
}

}  // namespace tff
