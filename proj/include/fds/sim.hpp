#pragma once

#include "fds/scenario.hpp"
#include "fds/trace.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace fds {

// Bits of the "fault" trace column.
enum FaultBit : int {
  kControllerFault = 1,  // control law not evaluable, last input held
  kObserverGainFault = 2,
  kEstimateProjected = 4,
  kInputClamped = 8,
  kTargetStep = 16,  // the current or setpoint changed since the previous row
};

// Column names for a given segment count, in trace order.
std::vector<std::string> trace_columns(int n_seg);

// Runs the configured loop. Throws IntegrationFault on a non-finite plant
// state; controller and observer faults are recorded in the trace instead.
Trace run_scenario(const Scenario& s);

struct PassivityReport {
  std::size_t ordered_samples = 0;  // rows with x_1 > x_2 > ... > x_n
  std::size_t ordering_holds = 0;   // ... where the supply rates are strictly ordered too
  double ordering_fraction = 1.0;
  std::size_t balance_violations = 0;  // rows with total Hdot > total supply + tol
  double worst_balance = 0.0;          // max (Hdot - supply) / max(1, |supply|)
};

PassivityReport segment_passivity(const Trace& t, int n_seg);

struct LyapunovReport {
  std::size_t counted = 0;      // rows outside the step windows
  std::size_t decreasing = 0;   // of those, Hdot_d <= tol
  double fraction = 1.0;
  double max_increase = 0.0;    // largest V_d rise between consecutive counted rows
  double v_initial = 0.0;
  double v_final = 0.0;
  double final_error = 0.0;     // |e| at the last row
};

LyapunovReport lyapunov_vd(const Trace& t, const MetricsOptions& opt);

// Ordered key/value summary of a trace.
using Metrics = std::map<std::string, double>;
Metrics metrics(const Trace& t, const MetricsOptions& opt);
void write_metrics(const Metrics& m, std::ostream& os);
Metrics read_metrics(std::istream& is);

}  // namespace fds
