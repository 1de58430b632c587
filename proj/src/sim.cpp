#include "fds/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace fds {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::vector<std::string> trace_columns(int n_seg) {
  const StateLayout L{n_seg};
  const auto names = L.names();
  std::vector<std::string> c{"t"};
  for (const auto& n : names) c.push_back(n);
  for (const auto& n : names) c.push_back("xhat_" + n);
  for (const char* n : {"u_bl_raw", "u_ht_raw", "u_bl", "u_ht", "current", "x_nd", "x_smd"}) c.emplace_back(n);
  for (const auto& n : names) c.push_back("zeta_" + n);
  for (const char* n : {"H", "H_d", "Hdot_d", "V_d", "V_ob", "e_n", "e_sm", "est_err_n", "est_err_sm",
                        "est_peak_n", "est_peak_sm", "nu_n", "nu_sm"}) {
    c.emplace_back(n);
  }
  for (int k = 0; k < n_seg; ++k) c.push_back("supply_s" + std::to_string(k + 1));
  c.emplace_back("supply_sm");
  for (int k = 0; k < n_seg; ++k) c.push_back("hdot_s" + std::to_string(k + 1));
  c.emplace_back("hdot_sm");
  for (const char* n : {"min_eig_R", "min_eig_Rd", "skew_J", "skew_Jd", "total_moles", "obs_cond",
                        "guards", "fault"}) {
    c.emplace_back(n);
  }
  return c;
}

namespace {

struct RowInputs {
  double t;
  const Vec& x;
  const ObserverState& obs;
  const ControlOutput* ctrl;
  InputVector u;
  const CurrentSplit& split;
  const DesiredTrajectory* traj;
  const EnergyShaping* sh;
  double peak_n, peak_sm;
  int fault;
};

std::vector<double> make_row(const RowInputs& r, const Scenario& s) {
  const StackParams& p = s.params;
  const StateLayout L{p.n_seg};
  const EnergyCoeffs& k = s.gains.energy;
  const int rn = L.total(L.last());
  std::vector<double> row;
  row.reserve(static_cast<std::size_t>(6 * L.size() + 40));
  row.push_back(r.t);
  for (int i = 0; i < L.size(); ++i) row.push_back(r.x[i]);
  for (int i = 0; i < L.size(); ++i) row.push_back(r.obs.x_hat[i]);
  row.push_back(r.ctrl ? r.ctrl->u_raw.u_bl : r.u.u_bl);
  row.push_back(r.ctrl ? r.ctrl->u_raw.u_ht : r.u.u_ht);
  row.push_back(r.u.u_bl);
  row.push_back(r.u.u_ht);
  row.push_back(r.split.total);
  row.push_back(r.traj ? r.traj->x_nd : kNaN);
  row.push_back(r.traj ? r.traj->x_smd : kNaN);
  const Vec zeta = disturbance(r.x, r.split, p);
  for (int i = 0; i < L.size(); ++i) row.push_back(zeta[i]);

  const Vec xdot = dynamics(r.x, r.u, r.split, p);
  row.push_back(hamiltonian(r.x, k));
  double hd = kNaN, hdot = kNaN, vd = kNaN, en = kNaN, esm = kNaN;
  if (r.sh != nullptr) {
    en = r.x[rn] - r.traj->x_nd;
    esm = r.x[L.sm()] - r.traj->x_smd;
    try {
      hd = closed_loop_energy(r.x, *r.sh);
      hdot = closed_loop_energy_grad(r.x, *r.sh).dot(xdot);
      vd = 0.5 * (en * en + esm * esm) + hd;
    } catch (const SingularityError&) {
    }
  }
  const Vec xt = r.x - r.obs.x_hat;
  row.insert(row.end(), {hd, hdot, vd, 0.5 * xt.squaredNorm(), en, esm, std::abs(xt[rn]),
                         std::abs(xt[L.sm()]), r.peak_n, r.peak_sm, r.obs.nu[0], r.obs.nu[1]});

  const auto ports = segment_ports(r.x, r.u, r.split, p, k);
  for (const auto& port : ports) row.push_back(port.supply);
  for (const auto& port : ports) row.push_back(port.energy_rate);

  const AuxCoeffs aux = aux_coefficients(r.x, p);
  const Mat G = input_map(r.x, p);
  AssignedDamping damping;
  bool damping_ok = true;
  if (r.sh != nullptr) {
    try {
      const auto d = assigned_damping(r.x, r.sh->grad(r.x), G, *r.traj, s.gains);
      if (d) damping = *d; else damping_ok = false;
    } catch (const SingularityError&) {
      damping_ok = false;
    }
  }
  const int q0 = std::clamp(s.gains.q - 1, 0, p.n_seg - 1);
  const PHStructure st = build_structure(aux, k, G, damping, q0);
  row.push_back(min_sym_eigenvalue(st.R));
  row.push_back(damping_ok ? min_sym_eigenvalue(st.R_d) : kNaN);
  row.push_back(skew_residual(st.J));
  row.push_back(skew_residual(st.J_d));
  row.push_back(total_moles(r.x, p));
  row.push_back(r.obs.condition);
  row.push_back(r.ctrl ? r.ctrl->guards.bits() : 0);
  row.push_back(r.fault);
  return row;
}

}  // namespace

Trace run_scenario(const Scenario& s) {
  s.validate();
  const StackParams& p = s.params;
  const StateLayout L{p.n_seg};
  const bool closed = s.mode != Mode::open_loop;
  Trace trace(trace_columns(p.n_seg));
  trace.comment = "scenario=" + s.name + " mode=" + mode_name(s.mode) + " dt=" + std::to_string(s.dt) +
                  " integrator=" + scheme_name(s.integrator) + " n_seg=" + std::to_string(p.n_seg) +
                  "; columns: t [s], states and xhat_* [Pa], inputs [-], current [A], setpoints [Pa],"
                  " zeta_* [Pa/s], energies, port rates, structure checks, guard/fault bitmasks";

  double amps = s.current_at(0.0);
  SetpointStep sp = s.setpoint_at(0.0);
  CurrentSplit split = CurrentSplit::proportional(amps, p.proportions);
  DesiredTrajectory traj;
  EnergyShaping sh;
  if (closed || s.initial_state.empty()) traj = solve_desired(sp.x_nd, sp.x_smd, split, p);
  if (closed) sh = make_shaping(traj, s.gains);

  Vec x(L.size());
  if (!s.initial_state.empty()) {
    for (int i = 0; i < L.size(); ++i) x[i] = s.initial_state[static_cast<std::size_t>(i)];
  } else {
    // Offsets keep each volume's composition so the state stays feasible.
    x = traj.x_d;
    const auto offset = [&](int h2, int total, double dp) {
      x[h2] *= (x[total] + dp) / x[total];
      x[total] += dp;
    };
    offset(L.h2(L.last()), L.total(L.last()), s.perturb_n);
    offset(L.sm_h2(), L.sm(), s.perturb_sm);
  }
  Vec xhat = x;
  if (s.mode == Mode::output_feedback) {
    if (!s.initial_estimate.empty()) {
      for (int i = 0; i < L.size(); ++i) xhat[i] = s.initial_estimate[static_cast<std::size_t>(i)];
    } else {
      xhat = x * (1.0 + s.estimate_offset);
    }
  }
  ObserverState obs = make_observer(xhat, s.observer);

  InputVector last_u = closed ? traj.u_d : s.open_loop_u.clamped();
  const auto steps = static_cast<long long>(std::llround(s.duration / s.dt));
  double peak_n = 0.0, peak_sm = 0.0;
  int fault = kTargetStep;
  const int rn = L.total(L.last());

  for (long long i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * s.dt;
    try {
      if (i > 0) {
        const double a = s.current_at(t);
        const SetpointStep spn = s.setpoint_at(t);
        if (a != amps || spn.x_nd != sp.x_nd || spn.x_smd != sp.x_smd) {
          amps = a;
          sp = spn;
          split = CurrentSplit::proportional(amps, p.proportions);
          if (closed) {
            traj = solve_desired(sp.x_nd, sp.x_smd, split, p, &traj.x_d);
            sh = make_shaping(traj, s.gains);
          }
          fault |= kTargetStep;
        }
      }
      const Eigen::Vector2d y(x[rn], x[L.sm()]);
      ControlOutput ctrl;
      InputVector u = last_u;
      if (closed) {
        ctrl = s.mode == Mode::state_feedback
                   ? state_feedback_control(x, y, traj, s.gains, sh, disturbance(x, split, p), p)
                   : output_feedback_control(obs, y, traj, s.gains, sh, p);
        if (ctrl.fault) {
          fault |= kControllerFault;
          ctrl.u_raw = last_u;
          ctrl.u = last_u;
        } else {
          u = ctrl.u;
          if (u.u_bl != ctrl.u_raw.u_bl || u.u_ht != ctrl.u_raw.u_ht) fault |= kInputClamped;
          last_u = u;
        }
      } else {
        u = s.open_loop_u.clamped();
      }

      peak_n = std::max(peak_n, std::abs(x[rn] - obs.x_hat[rn]));
      peak_sm = std::max(peak_sm, std::abs(x[L.sm()] - obs.x_hat[L.sm()]));
      if (i % s.record_every == 0 || i == steps) {
        trace.append(make_row({t, x, obs, closed ? &ctrl : nullptr, u, split, closed ? &traj : nullptr,
                               closed ? &sh : nullptr, peak_n, peak_sm, fault},
                              s));
        peak_n = peak_sm = 0.0;
        fault = 0;
      }
      if (i == steps) break;

      auto f = [&](const Vec& xx) { return dynamics(xx, u, split, p); };
      x = integrate_step(x, f, s.dt, s.integrator);
      if (s.mode == Mode::output_feedback) {
        observer_step(obs, u, y, split, p, s.observer, s.dt, s.integrator);
        if (obs.projected) fault |= kEstimateProjected;
        if (obs.gain_fault) fault |= kObserverGainFault;
      } else {
        obs.x_hat = x;
      }
    } catch (const IntegrationFault&) {
      throw;
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "t = " << t << " s: " << e.what() << " at state [" << x.transpose() << "]";
      throw IntegrationFault(os.str());
    }
  }
  return trace;
}

PassivityReport segment_passivity(const Trace& t, int n_seg) {
  PassivityReport r;
  std::vector<std::size_t> xc, sc, hc;
  for (int k = 0; k < n_seg; ++k) {
    xc.push_back(t.index("x" + std::to_string(k + 1)));
    sc.push_back(t.index("supply_s" + std::to_string(k + 1)));
    hc.push_back(t.index("hdot_s" + std::to_string(k + 1)));
  }
  const std::size_t ssm = t.index("supply_sm"), hsm = t.index("hdot_sm");
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const auto& row = t.row(i);
    bool ordered = true, supply_ordered = true;
    for (int k = 1; k < n_seg; ++k) {
      ordered = ordered && row[xc[k - 1]] > row[xc[k]];
      supply_ordered = supply_ordered && row[sc[k - 1]] > row[sc[k]];
    }
    if (ordered) {
      ++r.ordered_samples;
      if (supply_ordered) ++r.ordering_holds;
    }
    double hdot = row[hsm], supply = row[ssm], scale = std::abs(row[ssm]);
    for (int k = 0; k < n_seg; ++k) {
      hdot += row[hc[k]];
      supply += row[sc[k]];
      scale += std::abs(row[sc[k]]);
    }
    const double excess = (hdot - supply) / std::max(1.0, scale);
    r.worst_balance = std::max(r.worst_balance, excess);
    if (excess > 1e-9) ++r.balance_violations;
  }
  r.ordering_fraction = r.ordered_samples ? static_cast<double>(r.ordering_holds) / r.ordered_samples : 1.0;
  return r;
}

namespace {

// Times at which the target changed (including the start).
std::vector<double> step_times(const Trace& t) {
  std::vector<double> out;
  const std::size_t tc = t.index("t"), fc = t.index("fault");
  for (std::size_t i = 0; i < t.rows(); ++i) {
    if (static_cast<int>(t.row(i)[fc]) & kTargetStep) out.push_back(t.row(i)[tc]);
  }
  return out;
}

bool in_window(double time, const std::vector<double>& steps, double window) {
  for (double s : steps) {
    if (time >= s && time < s + window) return true;
  }
  return false;
}

}  // namespace

LyapunovReport lyapunov_vd(const Trace& t, const MetricsOptions& opt) {
  LyapunovReport r;
  if (t.rows() == 0) throw FormatError("empty trace");
  const auto steps = step_times(t);
  const std::size_t tc = t.index("t"), hc = t.index("Hdot_d"), hd = t.index("H_d"), vc = t.index("V_d");
  const std::size_t en = t.index("e_n"), es = t.index("e_sm");
  double prev_v = kNaN;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const auto& row = t.row(i);
    if (in_window(row[tc], steps, opt.step_window)) {
      prev_v = kNaN;
      continue;
    }
    ++r.counted;
    if (row[hc] <= opt.decay_tol * std::max(1.0, std::abs(row[hd]))) ++r.decreasing;
    if (!std::isnan(prev_v)) r.max_increase = std::max(r.max_increase, row[vc] - prev_v);
    prev_v = row[vc];
  }
  r.fraction = r.counted ? static_cast<double>(r.decreasing) / r.counted : 1.0;
  r.v_initial = t.row(0)[vc];
  r.v_final = t.row(t.rows() - 1)[vc];
  const auto& last = t.row(t.rows() - 1);
  r.final_error = std::hypot(last[en], last[es]);
  return r;
}

Metrics metrics(const Trace& t, const MetricsOptions& opt) {
  if (t.rows() == 0) throw FormatError("empty trace");
  const int n_seg = (static_cast<int>(t.index("xhat_x1_h2")) - 1) / 2 - 1;
  Metrics m;
  m["rows"] = static_cast<double>(t.rows());
  m["t_end"] = t.row(t.rows() - 1)[0];
  const auto steps = step_times(t);
  m["target_steps"] = static_cast<double>(steps.size());

  const std::size_t tc = 0, en = t.index("e_n"), es = t.index("e_sm");
  const std::size_t pn = t.index("est_peak_n"), ps = t.index("est_peak_sm"), fc = t.index("fault");
  double sum_n = 0, sum_sm = 0, max_n = 0, max_sm = 0;
  double max_est_n = 0, max_est_sm = 0, min_rd = kNaN, min_r = kNaN, skew = 0, skew_d = 0;
  std::size_t cnt = 0;
  int ctrl_faults = 0, gain_faults = 0, projected = 0, clamped = 0;
  const std::size_t rdc = t.index("min_eig_Rd"), rc = t.index("min_eig_R");
  const std::size_t sj = t.index("skew_J"), sjd = t.index("skew_Jd"), mc = t.index("total_moles");
  const double m0 = t.row(0)[mc];
  double drift = 0.0;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const auto& row = t.row(i);
    if (!std::isnan(row[en])) {
      sum_n += row[en] * row[en];
      sum_sm += row[es] * row[es];
      max_n = std::max(max_n, std::abs(row[en]));
      max_sm = std::max(max_sm, std::abs(row[es]));
      ++cnt;
    }
    // A row's peak covers the steps since the previous row.
    const double t_prev = i > 0 ? t.row(i - 1)[tc] : row[tc];
    if (i > 0 && t_prev >= opt.estimate_skip) {
      max_est_n = std::max(max_est_n, row[pn]);
      max_est_sm = std::max(max_est_sm, row[ps]);
    }
    if (!std::isnan(row[rdc])) min_rd = std::isnan(min_rd) ? row[rdc] : std::min(min_rd, row[rdc]);
    min_r = std::isnan(min_r) ? row[rc] : std::min(min_r, row[rc]);
    skew = std::max(skew, row[sj]);
    skew_d = std::max(skew_d, row[sjd]);
    const int f = static_cast<int>(row[fc]);
    ctrl_faults += (f & kControllerFault) ? 1 : 0;
    gain_faults += (f & kObserverGainFault) ? 1 : 0;
    projected += (f & kEstimateProjected) ? 1 : 0;
    clamped += (f & kInputClamped) ? 1 : 0;
    drift = std::max(drift, std::abs(row[mc] - m0) / m0);
  }
  m["rmse_e_n"] = cnt ? std::sqrt(sum_n / cnt) : kNaN;
  m["rmse_e_sm"] = cnt ? std::sqrt(sum_sm / cnt) : kNaN;
  m["max_abs_e_n"] = cnt ? max_n : kNaN;
  m["max_abs_e_sm"] = cnt ? max_sm : kNaN;
  m["max_est_err_n"] = max_est_n;
  m["max_est_err_sm"] = max_est_sm;
  m["min_eig_R"] = min_r;
  m["min_eig_Rd"] = min_rd;
  m["max_skew_J"] = skew;
  m["max_skew_Jd"] = skew_d;
  m["controller_fault_rows"] = ctrl_faults;
  m["observer_gain_fault_rows"] = gain_faults;
  m["estimate_projected_rows"] = projected;
  m["input_clamped_rows"] = clamped;
  m["total_moles_drift"] = drift;

  if (cnt) {
    const LyapunovReport ly = lyapunov_vd(t, opt);
    m["hdot_d_nonpositive_fraction"] = ly.fraction;
    m["v_d_initial"] = ly.v_initial;
    m["v_d_final"] = ly.v_final;
    m["v_d_max_increase"] = ly.max_increase;
    m["final_error_norm"] = ly.final_error;
    // Settling after the last target step.
    const double last_step = steps.empty() ? 0.0 : steps.back();
    for (const auto& [col, key] : {std::pair{en, "settle_time_n"}, std::pair{es, "settle_time_sm"}}) {
      double settle = kNaN;
      for (std::size_t i = t.rows(); i-- > 0;) {
        const auto& row = t.row(i);
        if (row[tc] < last_step) break;
        if (std::abs(row[col]) > opt.settle_band) break;
        settle = row[tc] - last_step;
      }
      m[key] = settle;
    }
  }
  const PassivityReport pr = segment_passivity(t, n_seg);
  m["passivity_ordered_samples"] = static_cast<double>(pr.ordered_samples);
  m["passivity_ordering_fraction"] = pr.ordering_fraction;
  m["passivity_balance_violations"] = static_cast<double>(pr.balance_violations);
  m["passivity_worst_balance"] = pr.worst_balance;
  return m;
}

void write_metrics(const Metrics& m, std::ostream& os) {
  char buf[32];
  for (const auto& [k, v] : m) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    os << k << " = " << std::string(buf, res.ptr) << '\n';
  }
}

Metrics read_metrics(std::istream& is) {
  Metrics m;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    const std::string val = line.substr(eq + 3);
    double v = 0.0;
    const auto res = std::from_chars(val.data(), val.data() + val.size(), v);
    if (res.ec != std::errc()) throw FormatError("bad metric value in '" + line + "'");
    m[line.substr(0, eq)] = v;
  }
  return m;
}

}  // namespace fds
