#include "fds/scenario.hpp"
#include "fds/sim.hpp"
#include "fds/trace.hpp"
#include "fds/verify.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFault = 2;
constexpr int kConfigError = 3;

struct Common {
  std::string scenario;
  std::string out;
  std::vector<std::string> overrides;
  long long seed = -1;
  bool quiet = false;
  bool verbose = false;
};

fds::Scenario load(const Common& c) {
  fds::Scenario s = c.scenario.empty() ? fds::Scenario{} : fds::load_scenario(c.scenario);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw fds::ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    fds::apply_override(s, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed >= 0) s.seed = static_cast<std::uint64_t>(c.seed);
  s.validate();
  return s;
}

std::string metrics_path(const std::string& trace_path) {
  std::filesystem::path p(trace_path);
  return p.replace_extension(".metrics").string();
}

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

int simulate(const Common& c) {
  const fds::Scenario s = load(c);
  if (c.verbose) std::cerr << "running " << s.name << " (" << fds::mode_name(s.mode) << ", "
                           << s.duration / s.dt << " steps)\n";
  const fds::Trace t = fds::run_scenario(s);
  const fds::Metrics m = fds::metrics(t, s.metrics);
  const std::string out = c.out.empty() ? s.name + ".csv" : c.out;
  t.write_csv(out);
  std::ofstream mf(metrics_path(out));
  fds::write_metrics(m, mf);
  if (!mf) throw std::runtime_error("cannot write metrics next to '" + out + "'");
  if (!c.quiet) {
    std::cout << "trace: " << out << " (" << t.rows() << " rows)\nmetrics: " << metrics_path(out) << '\n';
    if (c.verbose) fds::write_metrics(m, std::cout);
  }
  return kOk;
}

int verify(const Common& c, bool inject) {
  const fds::Scenario s = load(c);
  fds::VerifyOptions opt;
  opt.seed = s.seed;
  opt.inject_sign_error = inject;
  const auto checks = fds::verify_structure(s, opt);
  if (!c.out.empty()) {
    std::ofstream f(c.out);
    fds::print_checks(checks, f);
  }
  const bool ok = fds::all_pass(checks);
  if (!c.quiet) fds::print_checks(checks, std::cout);
  if (!ok) {
    for (const auto& ch : checks) {
      if (!ch.pass && ch.gating) std::cerr << "check failed: " << ch.name << '\n';
    }
  }
  return ok ? kOk : 1;
}

int sweep(const Common& c, std::string param, std::vector<double> values) {
  fds::Scenario base = load(c);
  if (param.empty()) param = base.sweep_param;
  if (values.empty()) values = base.sweep_values;
  if (param.empty() || values.empty()) throw fds::ConfigError("sweep needs a parameter and values");
  {
    fds::Scenario probe = base;
    fds::apply_override(probe, param, num(values.front()));
  }
  const std::filesystem::path dir(c.out.empty() ? base.name + "_sweep" : c.out);
  std::filesystem::create_directories(dir);
  std::vector<fds::Metrics> rows;
  std::set<std::string> keys;
  int faults = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    fds::Scenario s = base;
    fds::apply_override(s, param, num(values[i]));
    s.validate();
    const std::string stem = base.name + "_" + std::to_string(i);
    fds::Metrics m;
    try {
      const fds::Trace t = fds::run_scenario(s);
      t.write_csv((dir / (stem + ".csv")).string());
      m = fds::metrics(t, s.metrics);
      // Final state, for dt-refinement comparisons.
      const auto& last = t.row(t.rows() - 1);
      for (const auto& name : fds::StateLayout{s.params.n_seg}.names()) m["final_" + name] = last[t.index(name)];
    } catch (const fds::IntegrationFault& e) {
      ++faults;
      m["fault"] = 1.0;
      std::cerr << param << " = " << num(values[i]) << ": " << e.what() << '\n';
    }
    for (const auto& [k, _] : m) keys.insert(k);
    rows.push_back(std::move(m));
    if (!c.quiet) std::cout << param << " = " << num(values[i]) << " -> " << stem << ".csv\n";
  }
  std::ofstream table(dir / "metrics.csv");
  table << "param,value";
  for (const auto& k : keys) table << ',' << k;
  table << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table << param << ',' << num(values[i]);
    for (const auto& k : keys) {
      const auto it = rows[i].find(k);
      table << ',' << (it == rows[i].end() ? std::string("nan") : num(it->second));
    }
    table << '\n';
  }
  if (!c.quiet) std::cout << "metrics table: " << (dir / "metrics.csv").string() << '\n';
  return faults ? kRuntimeFault : kOk;
}

int params(const Common& c) {
  const fds::Scenario s = load(c);
  if (c.out.empty()) {
    fds::write_scenario(s, std::cout);
  } else {
    std::ofstream f(c.out);
    fds::write_scenario(s, f);
  }
  return kOk;
}

void add_common(CLI::App* app, Common& c, bool need_scenario) {
  auto* opt = app->add_option("--scenario", c.scenario, "scenario file");
  if (need_scenario) opt->required();
  app->add_option("--out", c.out, "output path");
  app->add_option("--set", c.overrides, "override KEY=VALUE (repeatable)");
  app->add_option("--seed", c.seed, "random seed");
  app->add_flag("--quiet,-q", c.quiet, "suppress normal output");
  app->add_flag("--verbose,-v", c.verbose, "extra output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segmented anode fuel-delivery simulator and controller"};
  app.require_subcommand(1);
  Common c;
  bool inject = false;
  std::string sweep_param;
  std::vector<double> sweep_values;

  auto* sim = app.add_subcommand("simulate", "run a scenario, write trace CSV and metrics");
  add_common(sim, c, true);
  auto* ver = app.add_subcommand("verify", "structural and closed-loop condition checks");
  add_common(ver, c, true);
  ver->add_flag("--inject-sign-error", inject, "flip one J_d entry (negative test)");
  auto* swp = app.add_subcommand("sweep", "run one scenario per parameter value");
  add_common(swp, c, true);
  swp->add_option("--param", sweep_param, "parameter to sweep");
  swp->add_option("--values", sweep_values, "values")->delimiter(',');
  auto* par = app.add_subcommand("params", "print the effective scenario");
  add_common(par, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) return simulate(c);
    if (*ver) return verify(c, inject);
    if (*swp) return sweep(c, sweep_param, sweep_values);
    if (*par) return params(c);
  } catch (const fds::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fds::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << '\n';
    return kRuntimeFault;
  }
  return kOk;
}
