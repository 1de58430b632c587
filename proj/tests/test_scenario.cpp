#include "fds/scenario.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace fds;

namespace {

const char* kMinimal =
    "[run]\n"
    "duration = 10\n"
    "dt = 1e-3\n"
    "mode = state_feedback\n";

Scenario parse(const std::string& text) {
  std::istringstream is(text);
  return parse_scenario(is, "test.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Scenario, MinimalFileUsesDefaults) {
  const Scenario s = parse(kMinimal);
  EXPECT_EQ(s.duration, 10.0);
  EXPECT_EQ(s.dt, 1e-3);
  EXPECT_EQ(s.mode, Mode::state_feedback);
  EXPECT_EQ(s.integrator, Scheme::rk4);
  EXPECT_EQ(s.params.n_seg, 3);
}

TEST(Scenario, MissingDtNamesTheKey) {
  const std::string e = error_of("[run]\nduration = 10\nmode = open_loop\n");
  EXPECT_NE(e.find("run.dt"), std::string::npos) << e;
}

TEST(Scenario, ErrorsCarryLineNumbers) {
  const std::string e = error_of(std::string(kMinimal) + "bogus = 1\n");
  EXPECT_NE(e.find("test.cfg:5"), std::string::npos) << e;
  EXPECT_NE(e.find("bogus"), std::string::npos) << e;
  const std::string d = error_of(std::string(kMinimal) + "dt = 2e-3\n");
  EXPECT_NE(d.find("test.cfg:5"), std::string::npos) << d;
  const std::string n = error_of(std::string(kMinimal) + "[params]\nalpha = fast\n");
  EXPECT_NE(n.find("test.cfg:6"), std::string::npos) << n;
}

TEST(Scenario, RejectsInvalidValues) {
  EXPECT_THROW(parse("[run]\nduration = 10\ndt = -1\nmode = open_loop\n"), ConfigError);
  EXPECT_THROW(parse("[run]\nduration = 10\ndt = 1e-3\nmode = closed\n"), ConfigError);
  EXPECT_THROW(parse(std::string(kMinimal) + "[profile]\ncurrent = 1:100\n"), ConfigError);
  EXPECT_THROW(parse(std::string(kMinimal) + "[profile]\ncurrent = 0:100, 0:200\n"), ConfigError);
  EXPECT_THROW(parse(std::string(kMinimal) + "[initial]\nstate = 1, 2\n"), ConfigError);
}

TEST(Scenario, ProfilesArePiecewiseConstant) {
  const Scenario s = parse(std::string(kMinimal) +
                           "[profile]\ncurrent = 0:150, 5:250\nsetpoint = 0:101200:116200, 7:101000:117000\n");
  EXPECT_EQ(s.current_at(0.0), 150.0);
  EXPECT_EQ(s.current_at(4.999), 150.0);
  EXPECT_EQ(s.current_at(5.0), 250.0);
  EXPECT_EQ(s.setpoint_at(6.0).x_nd, 101200.0);
  EXPECT_EQ(s.setpoint_at(8.0).x_smd, 117000.0);
}

TEST(Scenario, OverridesBareAndQualified) {
  Scenario s = parse(kMinimal);
  apply_override(s, "duration", "2");
  apply_override(s, "run.mode", "output_feedback");
  apply_override(s, "params.k_cr_h2", "1e-11");
  apply_override(s, "k_sm", "0.5");
  EXPECT_EQ(s.duration, 2.0);
  EXPECT_EQ(s.mode, Mode::output_feedback);
  EXPECT_EQ(s.params.k_cr_h2, 1e-11);
  EXPECT_EQ(s.gains.energy.k_sm, 0.5);
  EXPECT_THROW(apply_override(s, "nope", "1"), ConfigError);
}

TEST(Scenario, WriteThenParseRoundTrips) {
  Scenario s = parse(std::string(kMinimal) + "[profile]\ncurrent = 0:150, 5:250\n");
  s.gains.energy.k_sm = 0.43854545454545446;
  s.params.k_cr_n2 = 1.2345678901234567e-11;
  s.observer.alpha1 = 0.3;
  s.perturb_n = 300;
  std::ostringstream a;
  write_scenario(s, a);
  std::istringstream is(a.str());
  const Scenario r = parse_scenario(is, "round");
  std::ostringstream b;
  write_scenario(r, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(r.gains.energy.k_sm, s.gains.energy.k_sm);
  EXPECT_EQ(r.params.k_cr_n2, s.params.k_cr_n2);
  EXPECT_EQ(r.current.size(), 2u);
}

TEST(Scenario, EveryKeyIsAcceptedAsOverride) {
  const std::vector<std::string> keys = scenario_keys();
  EXPECT_GT(keys.size(), 40u);
  for (const auto& k : keys) EXPECT_NE(k.find('.'), std::string::npos) << k;
}
