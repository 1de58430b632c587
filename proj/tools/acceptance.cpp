// Runs every primary acceptance criterion and prints one PASS/FAIL line each.
// Exit status is nonzero when any gating line fails.

#include "fds/integrate.hpp"
#include "fds/scenario.hpp"
#include "fds/sim.hpp"
#include "fds/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#ifndef FDS_SCENARIO_DIR
#define FDS_SCENARIO_DIR "scenarios"
#endif

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Line {
  std::string name;
  bool pass;
  std::string detail;
  bool gating = true;
};

std::vector<Line> lines;

void report(const std::string& name, bool pass, const std::string& detail, bool gating = true) {
  lines.push_back({name, pass, detail, gating});
  std::printf("%-4s %-28s %s\n", gating ? (pass ? "PASS" : "FAIL") : (pass ? "info" : "XFAIL"),
              name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const fds::CheckResult* find(const std::vector<fds::CheckResult>& cs, const std::string& name) {
  for (const auto& c : cs)
    if (c.name == name) return &c;
  return nullptr;
}

// Worst value over checks whose name starts with `prefix`; false if any fails.
bool family(const std::vector<fds::CheckResult>& cs, const std::string& prefix, double& worst,
            bool want_max = true) {
  bool ok = true, first = true;
  for (const auto& c : cs) {
    if (c.name.rfind(prefix, 0) != 0) continue;
    ok = ok && c.pass;
    if (first || (want_max ? c.value > worst : c.value < worst)) worst = c.value;
    first = false;
  }
  return ok && !first;
}

struct Run {
  fds::Trace trace;
  fds::Metrics m;
  double seconds = 0.0;
};

Run simulate(const fds::Scenario& s) {
  const auto t0 = Clock::now();
  Run r;
  r.trace = fds::run_scenario(s);
  r.seconds = seconds_since(t0);
  r.m = fds::metrics(r.trace, s.metrics);
  return r;
}

double rk4_error(double dt) {
  fds::Vec x(1);
  x << 1.0;
  const auto n = std::lround(1.0 / dt);
  for (long i = 0; i < n; ++i)
    x = fds::integrate_step(x, [](const fds::Vec& v) { return fds::Vec(-v); }, dt, fds::Scheme::rk4);
  return std::abs(x[0] - std::exp(-1.0));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : FDS_SCENARIO_DIR;
  try {
    const fds::Scenario sf = fds::load_scenario(dir + "/nominal_state_feedback.cfg");
    const fds::Scenario of = fds::load_scenario(dir + "/nominal_output_feedback.cfg");
    const fds::Scenario cons = fds::load_scenario(dir + "/open_loop_conservation.cfg");

    // Structural checks on random states and at the nominal targets.
    fds::VerifyOptions vo;
    auto t0 = Clock::now();
    const auto checks = fds::verify_structure(sf, vo);
    const double verify_s = seconds_since(t0);

    const Run rsf = simulate(sf);

    {
      double sj = 0, sjd = 0;
      const auto* a = find(checks, "skew_J");
      const auto* b = find(checks, "skew_J_d");
      const auto* c = find(checks, "symmetric_R");
      const auto* d = find(checks, "symmetric_R_d");
      sj = a ? a->value : NAN;
      sjd = b ? b->value : NAN;
      double rd_targets = 0;
      const bool rd_ok = family(checks, "min_eig_R_d@", rd_targets, false);
      const double rd_traj = rsf.m.at("min_eig_Rd");
      const bool pass = a && b && c && d && a->pass && b->pass && c->pass && d->pass && rd_ok &&
                        rd_traj >= -1e-9 && verify_s < 10.0;
      report("structure_suite", pass,
             fmt("skew J %.1e, J_d %.1e (tol 1e-12 rel) on %g states; min eig R_d trajectory %.3g,", sj, sjd,
                 vo.structure_samples, rd_traj) +
                 fmt(" targets %.3g; %.1f s (< 10 s)", rd_targets, verify_s));
    }
    {
      const auto* f = find(checks, "factorization");
      report("factorization_oracle", f && f->pass && verify_s < 5.0,
             fmt("max rel residual %.2e over %g states (tol 1e-9); %.1f s (< 5 s)", f ? f->value : NAN,
                 vo.factorization_samples, verify_s));
    }
    {
      const auto* h = find(checks, "gradient_H");
      const auto* o = find(checks, "gradient_Omega");
      report("gradient_checks", h && o && h->pass && o->pass,
             fmt("grad H %.2e, Omega %.2e rel vs central differences (tol 1e-6, %g states)",
                 h ? h->value : NAN, o ? o->value : NAN, vo.gradient_samples));
    }
    {
      double integ = 0, eq = 0, eig = 0;
      const bool a = family(checks, "integrability@", integ);
      const bool b = family(checks, "equilibrium@", eq);
      const bool c = family(checks, "hessian_min_eig@", eig, false);
      report("ida_pbc_conditions", a && b && c && fds::all_pass(checks),
             fmt("integrability %.1e, equilibrium %.1e (tol 1e-6), min eig %.3g (> 0); verify ", integ, eq,
                 eig) + (fds::all_pass(checks) ? "exit 0" : "fails"));
    }
    {
      const Run r = simulate(cons);
      const double drift = r.m.at("total_moles_drift");
      report("conservation", drift <= 1e-8 && r.seconds < 60.0,
             fmt("total-mole drift %.2e rel over %g s at dt %g (tol 1e-8); %.1f s (< 60 s)", drift,
                 cons.duration, cons.dt, r.seconds));
    }
    {
      const double frac = rsf.m.at("hdot_d_nonpositive_fraction");
      const double v0 = rsf.m.at("v_d_initial"), v1 = rsf.m.at("v_d_final");
      report("lyapunov_decrease", frac >= 0.95 && v1 < v0,
             fmt("Hdot_d <= 0 at %.4f of samples outside %g s step windows (>= 0.95); V_d %.3g -> %.3g",
                 frac, sf.metrics.step_window, v0, v1));
    }
    const Run rof = simulate(of);
    {
      const double en = rof.m.at("max_est_err_n"), es = rof.m.at("max_est_err_sm");
      report("observer_bounds", en < 350.0 && es < 300.0 && rof.seconds < 120.0,
             fmt("max |x_n - xhat_n| %.3g Pa (< 350), |x_sm - xhat_sm| %.3g Pa (< 300) after %g s; %.1f s",
                 en, es, of.metrics.estimate_skip, rof.seconds));
    }
    {
      // The default tank capacity cannot supply the load; reported, not gating.
      fds::Scenario lit = of;
      lit.params = fds::StackParams{};
      lit.name = "default_params";
      std::string detail;
      bool pass = false;
      try {
        const Run r = simulate(lit);
        const double en = r.m.at("max_est_err_n"), es = r.m.at("max_est_err_sm");
        pass = en < 350.0 && es < 300.0;
        detail = fmt("max est err %.3g / %.3g Pa", en, es);
      } catch (const std::exception& e) {
        detail = std::string("no run: ") + e.what();
      }
      report("observer_bounds_default_params", pass, detail + " (tank capacity below consumption)", false);
    }
    {
      fds::Scenario exact = of;
      exact.estimate_offset = 0.0;
      exact.name = "exact_estimate";
      const Run r = simulate(exact);
      const auto& a = rsf.trace;
      const auto& b = r.trace;
      const auto inu = b.index("nu_n"), ins = b.index("nu_sm");
      double worst = 0.0;
      std::size_t agree_rows = 0;
      bool same_shape = a.rows() == b.rows();
      for (std::size_t i = 0; same_shape && i < a.rows(); ++i) {
        if (b.row(i)[inu] != 0.0 || b.row(i)[ins] != 0.0) break;
        for (const auto& c : fds::StateLayout{sf.params.n_seg}.names()) {
          const double x = a.at(i, c), y = b.at(i, c);
          worst = std::max(worst, std::abs(x - y) / std::max(1.0, std::abs(x)));
        }
        ++agree_rows;
      }
      const double ratio_n = r.m.at("rmse_e_n") / rsf.m.at("rmse_e_n");
      const double ratio_sm = r.m.at("rmse_e_sm") / rsf.m.at("rmse_e_sm");
      const double nominal_n = rof.m.at("rmse_e_n") / rsf.m.at("rmse_e_n");
      const double nominal_sm = rof.m.at("rmse_e_sm") / rsf.m.at("rmse_e_sm");
      report("performance_recovery",
             same_shape && worst < 1e-6 && ratio_n <= 2.0 && ratio_sm <= 2.0,
             fmt("xhat(0)=x(0): traces agree to %.1e rel over %g rows before nonzero nu; RMSE ratio %.3f / %.3f",
                 worst, static_cast<double>(agree_rows), ratio_n, ratio_sm) +
                 fmt(" (<= 2); with 1%% estimate offset %.3f / %.3f", nominal_n, nominal_sm));
    }
    {
      const double frac = rsf.m.at("passivity_ordering_fraction");
      const double viol = rsf.m.at("passivity_balance_violations");
      report("passivity_ordering", frac >= 0.99 && viol == 0.0,
             fmt("supply ordered at %.4f of %g ordered samples (>= 0.99); balance violations %g", frac,
                 rsf.m.at("passivity_ordered_samples"), viol));
    }
    {
      const double ratio = rk4_error(0.1) / rk4_error(0.05);
      report("integrator_order", ratio >= 12.0 && ratio <= 20.0,
             fmt("RK4 error ratio per dt halving %.2f (in [12, 20])", ratio));
    }
  } catch (const std::exception& e) {
    std::printf("FAIL %-28s %s\n", "acceptance_run", e.what());
    return 1;
  }
  int failed = 0, gating = 0;
  for (const auto& l : lines) {
    if (!l.gating) continue;
    ++gating;
    if (!l.pass) ++failed;
  }
  std::printf("%d of %d primary criteria pass\n", gating - failed, gating);
  return failed == 0 ? 0 : 1;
}
