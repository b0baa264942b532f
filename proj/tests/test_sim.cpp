#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "tff/errors.hpp"
#include "tff/prompt.hpp"
#include "tff/sim.hpp"
#include "tff/types.hpp"

using namespace tff;

namespace {

TaskFrameSpec spec_of(std::vector<AxisDirective> directives) {
  return TaskFrameSpec::create(normalize_task_name("probe task"),
                               make_coordinate_setting("z axis toward the surface"),
                               directives);
}

const TaskFrameSpec& turn_screw() { return SourceLibrary::builtin().sources()[0]; }

}  // namespace

TEST_CASE("prompt units convert to SI") {
  CHECK(to_si(5, Unit::Centimeter) == doctest::Approx(0.05));
  CHECK(to_si(-10, Unit::CmPerSec) == doctest::Approx(-0.1));
  CHECK(to_si(2, Unit::Radian) == 2.0);
  CHECK(to_si(5, Unit::RadPerSec) == 5.0);
  CHECK(to_si(-5, Unit::Newton) == -5.0);
  CHECK(to_si(3, Unit::NewtonMeter) == 3.0);
  CHECK(to_si(7, Unit::None) == 7.0);
}

TEST_CASE("specs map one-to-one onto controller selections") {
  SelectionAssignment assignment = spec_to_selection(turn_screw());
  CHECK(assignment.axis(Axis::TZ).kind == AxisSelection::Kind::Force);
  CHECK(assignment.axis(Axis::TZ).setpoint == -5.0);
  CHECK(assignment.axis(Axis::RZ).kind == AxisSelection::Kind::Velocity);
  CHECK(assignment.axis(Axis::RZ).setpoint_si() == 5.0);
  CHECK(assignment.axis(Axis::TX).kind == AxisSelection::Kind::Off);

  SelectionAssignment mixed =
      spec_to_selection(spec_of({make_directive(Axis::TY, -2, Unit::Centimeter),
                                 make_directive(Axis::RX, 1, Unit::Radian)}));
  CHECK(mixed.axis(Axis::TY).kind == AxisSelection::Kind::Position);
  CHECK(mixed.axis(Axis::TY).setpoint_si() == doctest::Approx(-0.02));
  CHECK(mixed.axis(Axis::RX).kind == AxisSelection::Kind::Position);
}

TEST_CASE("velocity axes converge to the commanded rate in free space") {
  TaskFrameSpec spec = spec_of({make_directive(Axis::TX, 10, Unit::CmPerSec)});
  SimTrace trace = simulate(spec, EnvironmentModel::free_space(), ControlGains{}, 2.0, 0.001);
  const AxisSample& last = trace.samples.back()[0];
  CHECK(last.rate == doctest::Approx(0.1).epsilon(1e-6));
  // first-order lag with kp=50: x(2) = sp*(2 - (1 - e^-100)/50) = 0.198
  CHECK(last.position == doctest::Approx(0.198).epsilon(1e-3));
}

TEST_CASE("position axes settle without overshoot at the default gains") {
  TaskFrameSpec spec = spec_of({make_directive(Axis::TZ, -5, Unit::Centimeter)});
  SimTrace trace = simulate(spec, EnvironmentModel::free_space(), ControlGains{}, 3.0, 0.001);
  double min_pos = 0.0;
  for (const auto& row : trace.samples) min_pos = std::min(min_pos, row[2].position);
  CHECK(trace.samples.back()[2].position == doctest::Approx(-0.05).epsilon(0.01));
  // critically damped (kd^2 = 4 kp): never passes the set-point
  CHECK(min_pos >= -0.05 - 1e-9);
}

TEST_CASE("force axes regulate the contact force against the desk") {
  SimTrace trace =
      simulate(turn_screw(), EnvironmentModel::desk_default(), ControlGains{}, 2.0, 0.001);
  const AxisSample& tz = trace.samples.back()[2];
  CHECK(tz.measured == doctest::Approx(-5.0).epsilon(0.01));
  // desk stiffness 100 N/cm = 1e4 N/m, so 5 N of push sits at -5e-4 m
  CHECK(tz.position == doctest::Approx(-5e-4).epsilon(0.02));
  // the velocity loop on the screwdriver axis is unaffected by the contact
  CHECK(trace.samples.back()[5].rate == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("a force set-point in free space never converges") {
  TaskFrameSpec spec = spec_of({make_directive(Axis::TZ, -5, Unit::Newton)});
  SimTrace trace = simulate(spec, EnvironmentModel::free_space(), ControlGains{}, 1.0, 0.001);
  SelectionAssignment assignment = spec_to_selection(spec);
  auto errors = steady_state_error(trace, assignment);
  REQUIRE(errors.count(Axis::TZ) == 1);
  CHECK(errors.at(Axis::TZ) == doctest::Approx(1.0));  // measured stays zero
}

TEST_CASE("angular contacts take torque set-points without unit conversion") {
  EnvironmentModel env = EnvironmentModel::free_space();
  env.contacts[5] = {true, 100.0, 5.0};  // Nm/rad on the angular z axis, no cm scaling
  TaskFrameSpec spec = spec_of({make_directive(Axis::RZ, 2, Unit::NewtonMeter)});
  SimTrace trace = simulate(spec, env, ControlGains{}, 4.0, 0.001);
  CHECK(trace.samples.back()[5].measured == doctest::Approx(2.0).epsilon(0.01));
  CHECK(trace.samples.back()[5].position == doctest::Approx(0.02).epsilon(0.02));
}

TEST_CASE("traces carry the initial row plus one row per step") {
  SimTrace trace = simulate(turn_screw(), EnvironmentModel::free_space(), ControlGains{},
                            0.1, 0.01);
  REQUIRE(trace.size() == 11);
  CHECK(trace.time.front() == 0.0);
  CHECK(trace.time.back() == doctest::Approx(0.1));
  CHECK(trace.dt == 0.01);
  // the last row reports state after the final step with the previous effort
  CHECK(trace.samples[10][5].effort == trace.samples[9][5].effort);
}

TEST_CASE("divergent dynamics stop with an error instead of NaNs") {
  ControlGains runaway;
  runaway.position_kp = -100.0;  // unstable feedback sign
  TaskFrameSpec spec = spec_of({make_directive(Axis::TZ, -5, Unit::Centimeter)});
  try {
    simulate(spec, EnvironmentModel::free_space(), runaway, 10.0, 0.001);
    FAIL("expected a throw");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::UnstableSimulation);
  }
}

TEST_CASE("step and duration arguments are validated") {
  CHECK_THROWS_AS(
      simulate(turn_screw(), EnvironmentModel::free_space(), ControlGains{}, 1.0, 0.0),
      Error);
  CHECK_THROWS_AS(
      simulate(turn_screw(), EnvironmentModel::free_space(), ControlGains{}, 0.0005, 0.001),
      Error);
}

TEST_CASE("steady-state errors need at least ten samples") {
  SimTrace trace = simulate(turn_screw(), EnvironmentModel::free_space(), ControlGains{},
                            0.005, 0.001);
  try {
    steady_state_error(trace, spec_to_selection(turn_screw()));
    FAIL("expected a throw");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::TraceTooShort);
  }
}

TEST_CASE("traces export as CSV with one column block per axis") {
  SimTrace trace = simulate(turn_screw(), EnvironmentModel::free_space(), ControlGains{},
                            0.01, 0.001);
  std::string csv = trace_to_csv(trace);
  CHECK(csv.rfind("t,", 0) == 0);
  CHECK(csv.find("translational_x_pos") != std::string::npos);
  CHECK(csv.find("angular_z_force") != std::string::npos);
  size_t lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 12);  // header + 11 rows
}

TEST_CASE("trace summaries report the selection and steady-state errors") {
  SimTrace trace = simulate(turn_screw(), EnvironmentModel::desk_default(), ControlGains{},
                            2.0, 0.001);
  std::string summary = trace_summary_json_text(trace, spec_to_selection(turn_screw()));
  CHECK(summary.find("\"steady_state_error\"") != std::string::npos);
  CHECK(summary.find("\"angular_z\"") != std::string::npos);
  CHECK(summary.find("\"kind\": \"force\"") != std::string::npos);
}

TEST_CASE("environments round trip through JSON") {
  EnvironmentModel env = EnvironmentModel::desk_default();
  EnvironmentModel reloaded = environment_from_json_text(environment_to_json_text(env));
  CHECK(reloaded.name == env.name);
  for (Axis axis : kAllAxes) {
    CHECK(reloaded.contact(axis).engaged == env.contact(axis).engaged);
    CHECK(reloaded.contact(axis).stiffness == env.contact(axis).stiffness);
    CHECK(reloaded.contact(axis).damping == env.contact(axis).damping);
  }
}

TEST_CASE("environment files reject negative coefficients") {
  CHECK_THROWS_AS(environment_from_json_text(
                      R"({"name":"bad","axes":{"translational_z":{"engaged":true,"stiffness":-1}}})"),
                  Error);
}

TEST_CASE("the shipped environment fixtures load") {
  std::string dir = std::string(TFF_SOURCE_DIR) + "/fixtures/environments/";
  CHECK(load_environment(dir + "free_space.json").name == "free_space");
  EnvironmentModel desk = load_environment(dir + "desk.json");
  CHECK(desk.contact(Axis::TZ).engaged);
  CHECK(desk.contact(Axis::TZ).stiffness == 100.0);
  EnvironmentModel wall = load_environment(dir + "wall.json");
  CHECK(wall.contact(Axis::TX).engaged);
  CHECK_FALSE(wall.contact(Axis::TZ).engaged);
}
