#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tff/types.hpp"

namespace tff {

// All simulation state is SI (m, m/s, N, rad, rad/s, Nm). Set-points and
// environment coefficients arrive in prompt units (cm, N/cm, ...); these are
// the only conversion constants.
inline constexpr double kMetersPerCentimeter = 0.01;

// Prompt-unit value -> SI. Passes through units that are already SI.
double to_si(double value, Unit unit);

struct AxisSelection {
  enum class Kind { Off, Force, Velocity, Position };

  Kind kind = Kind::Off;
  double setpoint = 0.0;   // prompt units (N, Nm, cm/sec, rad/sec, cm, rad)
  Unit unit = Unit::None;

  double setpoint_si() const { return to_si(setpoint, unit); }
};

std::string_view selection_kind_name(AxisSelection::Kind kind);

// The per-axis split of the six directions into force / velocity / position
// control, derived one-to-one from a spec: Force mode -> Force; rate unit ->
// Velocity; displacement unit -> Position; inactive -> Off.
struct SelectionAssignment {
  std::array<AxisSelection, 6> axes;

  const AxisSelection& axis(Axis a) const { return axes[static_cast<size_t>(a)]; }
};

SelectionAssignment spec_to_selection(const TaskFrameSpec& spec);

// Per-axis compliant contact: reaction = -(k*x + b*v) while engaged, zero
// otherwise. Coefficients are stored in prompt units (N/cm and N*s/cm on
// translational axes, Nm/rad and Nm*s/rad on angular ones).
struct AxisContact {
  bool engaged = false;
  double stiffness = 0.0;
  double damping = 0.0;
};

struct EnvironmentModel {
  std::string name;
  std::array<AxisContact, 6> contacts;

  const AxisContact& contact(Axis a) const { return contacts[static_cast<size_t>(a)]; }

  // No contact on any axis.
  static EnvironmentModel free_space();
  // Desk surface under the tool: contact on translational z (100 N/cm,
  // 0.2 N*s/cm), every other axis free.
  static EnvironmentModel desk_default();
};

EnvironmentModel environment_from_json_text(std::string_view text);
EnvironmentModel load_environment(const std::string& path);
std::string environment_to_json_text(const EnvironmentModel& env);

struct ControlGains {
  double force_kp = 1.0;
  double force_ki = 5.0;
  // Sized so a 2 s velocity ramp leaves under 1% displacement deficit.
  double velocity_kp = 50.0;
  double position_kp = 25.0;
  double position_kd = 10.0;
};

struct AxisSample {
  double position = 0.0;  // m or rad
  double rate = 0.0;      // m/s or rad/s
  double effort = 0.0;    // commanded force/torque, N or Nm
  double measured = 0.0;  // contact force/torque applied to the environment
};

struct SimTrace {
  double dt = 0.0;
  std::vector<double> time;                         // uniform grid from 0
  std::vector<std::array<AxisSample, 6>> samples;   // one row per time point

  size_t size() const { return samples.size(); }
};

// Decoupled unit-inertia double integrator per axis, fixed-step symplectic
// Euler. Force axes close a PI loop on the measured contact force, velocity
// axes a P loop on the rate, position axes a PD loop on the position.
// Throws UnstableSimulation when any state magnitude exceeds 1e6 and
// InvalidArgument on a non-positive dt or duration < dt.
SimTrace simulate_selection(const SelectionAssignment& assignment,
                            const EnvironmentModel& env, const ControlGains& gains,
                            double duration, double dt);

SimTrace simulate(const TaskFrameSpec& spec, const EnvironmentModel& env,
                  const ControlGains& gains, double duration, double dt);

// Relative steady-state error per active axis over the last 10% of samples:
// |mean(tracked quantity) - setpoint| / max(|setpoint|, 1e-9). The tracked
// quantity is the measured force for Force axes, the rate for Velocity axes,
// the position for Position axes. Throws TraceTooShort below 10 samples.
std::map<Axis, double> steady_state_error(const SimTrace& trace,
                                          const SelectionAssignment& assignment);

// CSV with header t,<axis>_pos,<axis>_rate,<axis>_effort,<axis>_force per
// axis, SI units throughout.
std::string trace_to_csv(const SimTrace& trace);

// Human- and machine-readable run summary (final row, per-axis steady-state
// errors, the selection that produced the trace).
std::string trace_summary_json_text(const SimTrace& trace,
                                    const SelectionAssignment& assignment);

}  // namespace tff
