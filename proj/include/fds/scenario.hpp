#pragma once

#include "fds/controller.hpp"
#include "fds/integrate.hpp"
#include "fds/observer.hpp"
#include "fds/params.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace fds {

enum class Mode { state_feedback, output_feedback, open_loop };

Mode parse_mode(const std::string& name);
std::string mode_name(Mode m);

struct CurrentStep {
  double t = 0.0;
  double amps = 0.0;
};

struct SetpointStep {
  double t = 0.0;
  double x_nd = 0.0;
  double x_smd = 0.0;
};

// Windows and bands used when summarizing a trace.
struct MetricsOptions {
  double estimate_skip = 10.0;  // s ignored at the start for estimation errors
  double step_window = 5.0;     // s excluded after each current/setpoint step
  double settle_band = 10.0;    // Pa
  double decay_tol = 1e-9;      // relative to max(1, H_d)
};

struct Scenario {
  std::string name = "scenario";
  double duration = 1000.0;
  double dt = 1e-3;
  Scheme integrator = Scheme::rk4;
  int record_every = 1;
  Mode mode = Mode::state_feedback;
  std::vector<CurrentStep> current{{0.0, 150.0}};
  std::vector<SetpointStep> setpoint{{0.0, 1.2e5, 1.5e5}};

  // Initial plant state: the first target's equilibrium plus offsets, or an
  // explicit vector when `initial_state` is non-empty.
  std::vector<double> initial_state;
  double perturb_n = 0.0;    // Pa added to x_n (H2 partial scaled along)
  double perturb_sm = 0.0;   // Pa added to x_sm (likewise)
  double estimate_offset = 0.02;  // relative offset of the initial estimate
  std::vector<double> initial_estimate;

  InputVector open_loop_u;
  StackParams params;
  ControllerGains gains;
  ObserverConfig observer;
  MetricsOptions metrics;
  std::uint64_t seed = 1;

  // Sweep axis (optional).
  std::string sweep_param;
  std::vector<double> sweep_values;

  void validate() const;
  double current_at(double t) const;
  SetpointStep setpoint_at(double t) const;
};

// Every accepted key as "section.key" in file order.
std::vector<std::string> scenario_keys();

// Parses "[section]" headers and "key = value" lines ('#' comments). Unknown
// keys, duplicates and missing required keys (run.duration, run.dt, run.mode)
// raise ConfigError with the line number.
Scenario parse_scenario(std::istream& is, const std::string& origin = "<config>");
Scenario load_scenario(const std::string& path);

// Writes every key with its effective value; parse_scenario reads it back.
void write_scenario(const Scenario& s, std::ostream& os);

// `key` may be "section.key" or a bare key that is unique across sections.
void apply_override(Scenario& s, const std::string& key, const std::string& value);

}  // namespace fds
