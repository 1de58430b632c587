#include "fds/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace fds;

namespace {

Scenario closed_loop(double duration, Mode mode) {
  Scenario s;
  s.name = "short";
  s.duration = duration;
  s.dt = 2.5e-4;
  s.record_every = 40;
  s.mode = mode;
  s.current = {{0.0, 150.0}, {duration / 2, 250.0}};
  s.setpoint = {{0.0, 101200, 116200}};
  s.perturb_n = 300;
  s.perturb_sm = -1000;
  s.estimate_offset = 0.0;
  s.params.tank_max_flow = 0.3;
  s.gains.energy.k_sm = s.gains.energy.k_sm_h2 = 0.43854545454545446;
  s.metrics.estimate_skip = 0.0;
  s.metrics.step_window = 1.0;
  return s;
}

Scenario sealed(int n_seg) {
  Scenario s;
  s.duration = 20;
  s.dt = 1e-3;
  s.record_every = 100;
  s.mode = Mode::open_loop;
  s.current = {{0.0, 0.0}};
  s.params.n_seg = n_seg;
  s.params.set_uniform_segments(n_seg);
  s.params.k_cr_h2 = s.params.k_cr_n2 = 0.0;
  s.params.area_bleed = 0.0;
  s.initial_state.clear();
  for (int k = 0; k < n_seg; ++k) {
    s.initial_state.push_back(1.0e5 + 1e3 * k);
    s.initial_state.push_back(1.2e5 - 5e3 * k);
  }
  s.initial_state.push_back(1.2e5);
  s.initial_state.push_back(1.5e5);
  return s;
}

}  // namespace

TEST(Columns, SchemaScalesWithSegments) {
  for (int n : {2, 3, 5}) {
    const auto c = trace_columns(n);
    EXPECT_EQ(c.front(), "t");
    EXPECT_EQ(c[1], "x1_h2");
    int states = 0;
    for (const auto& name : c) {
      if (name.rfind("x", 0) == 0 && name != "x_nd" && name != "x_smd" && name.rfind("xhat", 0) != 0) ++states;
    }
    EXPECT_EQ(states, 2 * n + 2) << n;
  }
}

TEST(Trace, CsvRoundTripIsExact) {
  Trace t({"t", "a", "b"});
  t.comment = "demo";
  t.append({0.0, 1.0 / 3.0, -2e-300});
  t.append({0.1, 123456.78901234567, 1e300});
  std::stringstream ss;
  t.write_csv(ss);
  const Trace r = Trace::read_csv(ss);
  ASSERT_EQ(r.rows(), 2u);
  EXPECT_EQ(r.columns(), t.columns());
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(r.row(i), t.row(i));
  EXPECT_THROW(r.index("missing"), FormatError);
  EXPECT_THROW(t.append({0.05, 0.0, 0.0}), FormatError);
  EXPECT_THROW(t.append({0.2, 0.0}), FormatError);
}

TEST(Trace, MalformedCsvIsRejected) {
  std::istringstream bad("t,a\n0,1\n0.1,oops\n");
  EXPECT_THROW(Trace::read_csv(bad), FormatError);
  std::istringstream empty("");
  EXPECT_THROW(Trace::read_csv(empty), FormatError);
}

TEST(Sim, SealedPathConservesMoles) {
  for (int n : {2, 3}) {
    const Trace t = run_scenario(sealed(n));
    EXPECT_EQ(t.columns(), trace_columns(n));
    const auto m = t.column("total_moles");
    EXPECT_LE(std::abs(m.back() - m.front()), 1e-8 * m.front()) << n;
  }
}

TEST(Sim, EquilibriumStartStaysPut) {
  Scenario s = closed_loop(2.0, Mode::state_feedback);
  s.current = {{0.0, 150.0}};
  s.perturb_n = s.perturb_sm = 0.0;
  const Trace t = run_scenario(s);
  const Metrics m = metrics(t, s.metrics);
  EXPECT_LE(m.at("rmse_e_n"), 1e-6);
  EXPECT_LE(m.at("rmse_e_sm"), 1e-6);
  EXPECT_EQ(m.at("target_steps"), 1.0);  // the start counts
}

TEST(Sim, RunsAreDeterministic) {
  const Scenario s = closed_loop(1.0, Mode::output_feedback);
  const Trace a = run_scenario(s), b = run_scenario(s);
  ASSERT_EQ(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) ASSERT_EQ(a.row(i), b.row(i));
}

TEST(Sim, ExactEstimateRecoversStateFeedback) {
  const Trace sf = run_scenario(closed_loop(4.0, Mode::state_feedback));
  const Trace of = run_scenario(closed_loop(4.0, Mode::output_feedback));
  ASSERT_EQ(sf.rows(), of.rows());
  for (std::size_t i = 0; i < sf.rows(); ++i) {
    EXPECT_EQ(of.at(i, "nu_n"), 0.0);
    EXPECT_EQ(sf.at(i, "xsm"), of.at(i, "xsm"));
    EXPECT_EQ(sf.at(i, "u_bl"), of.at(i, "u_bl"));
  }
}

TEST(Sim, ClosedLoopDecaysAndRecordsStep) {
  const Scenario s = closed_loop(20.0, Mode::state_feedback);
  const Trace t = run_scenario(s);
  const Metrics m = metrics(t, s.metrics);
  EXPECT_EQ(m.at("target_steps"), 2.0);
  const LyapunovReport l = lyapunov_vd(t, s.metrics);
  EXPECT_GE(l.fraction, 0.95);
  EXPECT_LT(l.v_final, l.v_initial);
  EXPECT_LT(std::abs(t.at(t.rows() - 1, "e_n")), 50.0);
  const PassivityReport p = segment_passivity(t, 3);
  EXPECT_EQ(p.balance_violations, 0u);
}

TEST(Metrics, WriteReadRoundTrip) {
  const Scenario s = closed_loop(1.0, Mode::state_feedback);
  const Metrics m = metrics(run_scenario(s), s.metrics);
  std::stringstream ss;
  write_metrics(m, ss);
  EXPECT_EQ(read_metrics(ss), m);
}

TEST(Passivity, HandBuiltRows) {
  auto cols = trace_columns(2);
  Trace t(cols);
  std::vector<double> row(cols.size(), 0.0);
  auto set = [&](const std::string& c, double v) { row[t.index(c)] = v; };
  set("x1", 3);
  set("x2", 2);
  set("supply_s1", 5);
  set("supply_s2", 4);
  set("supply_sm", 1);
  set("hdot_s1", 5);
  set("hdot_s2", 4);
  set("hdot_sm", 1);
  t.append(row);
  row[0] = 1.0;
  set("supply_s2", 6);  // ordering broken
  set("hdot_s2", 7);    // and more energy than supplied
  t.append(row);
  const PassivityReport p = segment_passivity(t, 2);
  EXPECT_EQ(p.ordered_samples, 2u);
  EXPECT_EQ(p.ordering_holds, 1u);
  EXPECT_EQ(p.balance_violations, 1u);
}

TEST(Lyapunov, StepWindowsAreExcluded) {
  auto cols = trace_columns(2);
  Trace t(cols);
  std::vector<double> row(cols.size(), 0.0);
  const std::size_t it = t.index("t"), iv = t.index("V_d"), ih = t.index("Hdot_d"), ifl = t.index("fault");
  const double v[] = {10, 8, 20, 15, 12};
  const double hd[] = {-1, -1, 5, -1, -1};
  for (int i = 0; i < 5; ++i) {
    row[it] = i;
    row[iv] = v[i];
    row[ih] = hd[i];
    row[ifl] = i == 2 ? kTargetStep : 0;
    t.append(row);
  }
  MetricsOptions o;
  o.step_window = 0.5;
  const LyapunovReport r = lyapunov_vd(t, o);
  EXPECT_EQ(r.counted, 4u);
  EXPECT_EQ(r.decreasing, 4u);
  EXPECT_EQ(r.v_initial, 10.0);
  EXPECT_EQ(r.v_final, 12.0);
}
