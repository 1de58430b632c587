#include "fds/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fds {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

void check_state(const Vec& x, const StackParams& p) {
  const StateLayout L{p.n_seg};
  if (x.size() != L.size()) {
    throw DomainError("state has " + std::to_string(x.size()) + " entries, expected " +
                      std::to_string(L.size()));
  }
  for (int i = 0; i < L.size(); ++i) {
    if (!std::isfinite(x[i])) throw DomainError("state " + L.names()[static_cast<std::size_t>(i)] + " is not finite");
  }
  for (int i = 1; i < L.size(); i += 2) {
    if (!(x[i] > 0.0)) {
      throw SingularityError("total pressure " + L.names()[static_cast<std::size_t>(i)] + " <= 0");
    }
  }
}

std::vector<double> to_std(const Vec& x) { return {x.data(), x.data() + x.size()}; }

}  // namespace

double orifice_flow(double p_up, double p_down, double p_species_up, double p_total_up,
                    double area, double molar_mass, double alpha) {
  require_finite(p_up, "p_up");
  require_finite(p_down, "p_down");
  require_finite(p_species_up, "p_species_up");
  require_finite(p_total_up, "p_total_up");
  if (p_total_up == 0.0) throw DomainError("upstream total pressure is zero");
  return alpha * area / molar_mass * (p_up - p_down) * (p_species_up / p_total_up);
}

double reaction_rate(double i_k, double n_cells, double faraday) {
  if (!std::isfinite(i_k) || i_k < 0.0) throw DomainError("segment current must be finite and >= 0");
  return n_cells * i_k / (2.0 * faraday);
}

double crossover_rate(double t_k, double n_cells, double k_cr, double p_high, double p_low) {
  require_finite(p_high, "p_high");
  require_finite(p_low, "p_low");
  if (!(t_k > 0.0 && t_k <= 1.0)) throw DomainError("segment proportion must lie in (0, 1]");
  return t_k * n_cells * k_cr * (p_high - p_low);
}

double cathode_n2_fraction(double current, const StackParams& p) {
  require_finite(current, "stack current");
  const double flow = p.faraday * p.alpha * p.area_cathode * (p.p_cathode - p.p_atm);
  const double den = 4.0 * flow - 0.79 * p.n_cells * current * (p.molar_mass_n2 - p.molar_mass_o2);
  if (std::abs(den) <= 1e-12 * std::abs(4.0 * flow) || den == 0.0) {
    throw SingularityError("cathode N2 fraction denominator vanishes");
  }
  const double num = 3.16 * flow * (1.0 - p.x_cathode_h2o) +
                     0.79 * p.n_cells * current *
                         (p.molar_mass_o2 + (p.molar_mass_h2o - p.molar_mass_o2) * p.x_cathode_h2o);
  const double r = num / den;
  if (!std::isfinite(r)) throw SingularityError("cathode N2 fraction is not finite");
  return r;
}

double cathode_n2_pressure(double current, const StackParams& p) {
  return cathode_n2_fraction(current, p) * (p.p_cathode - p.p_sat);
}

BlowerPoint blower_map(double inlet_temp, double p_ratio, double tip_speed,
                       const StackParams& params) {
  const BlowerParams& b = params.blower;
  if (!(tip_speed > 0.0)) throw DomainError("blower tip speed must be > 0");
  if (!(inlet_temp > 0.0)) throw DomainError("blower inlet temperature must be > 0");
  if (!(p_ratio > 0.0) || !std::isfinite(p_ratio)) throw DomainError("blower pressure ratio must be > 0");
  BlowerPoint pt;
  pt.mach = tip_speed / std::sqrt(b.gamma * b.specific_gas_constant * inlet_temp);
  double mp = 1.0;
  for (int i = 0; i < 6; ++i) {
    if (i < 5) pt.phi_max += b.a[static_cast<std::size_t>(i)] * mp;
    if (i < 3) pt.beta += b.b[static_cast<std::size_t>(i)] * mp;
    pt.psi_max += b.c[static_cast<std::size_t>(i)] * mp;
    mp *= pt.mach;
  }
  if (pt.psi_max == 0.0) throw SingularityError("blower head coefficient Psi_m is zero");
  const double exponent = (b.gamma - 1.0) / b.gamma;
  pt.psi = b.cp * inlet_temp * (std::pow(p_ratio, exponent) - 1.0) / (0.5 * tip_speed * tip_speed);
  pt.phi = pt.phi_max * (1.0 - std::exp(pt.beta * (pt.psi / pt.psi_max - 1.0)));
  pt.mass_flow_max = pt.phi * b.density * 0.25 * std::numbers::pi * b.diameter * b.diameter * tip_speed;
  return pt;
}

double blower_flow(double u_bl, double inlet_temp, double p_ratio, double tip_speed,
                   const StackParams& params) {
  if (!(u_bl >= 0.0 && u_bl <= 1.0)) throw DomainError("blower command must lie in [0, 1]");
  const BlowerPoint pt = blower_map(inlet_temp, p_ratio, tip_speed, params);
  return u_bl * pt.mass_flow_max / params.molar_mass_mix;
}

double blower_capacity(const Vec& x, const StackParams& params) {
  const StateLayout L{params.n_seg};
  const double pr = x[L.sm()] / x[L.total(L.last())];
  return blower_flow(1.0, params.blower.inlet_temperature, pr, params.blower.tip_speed(), params);
}

AuxCoeffs aux_coefficients(const Vec& x, const StackParams& p) {
  check_state(x, p);
  const int n = p.n_seg;
  const StateLayout L{n};
  AuxCoeffs a;
  a.n_seg = n;
  a.mu_sm = p.mu_manifold();
  a.m_ej = p.m_inlet();
  a.m_seg = p.m_inlet();
  a.m_bleed = p.m_bleed();
  const auto un = static_cast<std::size_t>(n);
  a.h2_diag.resize(un);
  a.h2_upstream.resize(un);
  a.total_h2.resize(un);
  a.total_diag.resize(un);
  a.total_prev.resize(un);
  a.total_next.assign(un, 0.0);
  a.mu.resize(un);
  a.rho.resize(un);
  a.xi.resize(un);

  for (int k = 0; k < n; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double mu = p.mu_segment(k);
    const double rho = p.rho(k);
    const double xi = p.xi(k);
    const double xk = x[L.total(k)];
    const double up = k == 0 ? x[L.sm()] : x[L.total(k - 1)];
    const double m_up = k == 0 ? a.m_ej : a.m_seg;
    a.mu[uk] = mu;
    a.rho[uk] = rho;
    a.xi[uk] = xi;
    a.h2_upstream[uk] = mu * m_up * (1.0 - xk / up);
    a.total_prev[uk] = mu * m_up;
    a.total_h2[uk] = mu * (xi - rho);
    if (k < n - 1) {
      const double down = x[L.total(k + 1)];
      a.h2_diag[uk] = -mu * (a.m_seg * (1.0 - down / xk) + rho);
      a.total_diag[uk] = -mu * (m_up + a.m_seg + xi);
      a.total_next[uk] = mu * a.m_seg;
    } else {
      // Bleed to atmosphere: the back pressure is folded into the coefficient.
      const double bleed = a.m_bleed * (1.0 - p.p_atm / xk);
      a.h2_diag[uk] = -mu * (bleed + rho);
      a.total_diag[uk] = -mu * (m_up + bleed + xi);
    }
  }
  a.a77 = -a.mu_sm * a.m_ej * (1.0 - x[L.total(0)] / x[L.sm()]);
  a.a82 = a.mu_sm * a.m_ej;
  a.a88 = -a.mu_sm * a.m_ej;
  a.zeta = Vec::Zero(L.size());
  return a;
}

AuxCoeffs aux_coefficients(const Vec& x, const CurrentSplit& split, const StackParams& p) {
  AuxCoeffs a = aux_coefficients(x, p);
  a.zeta = disturbance(x, split, p);
  return a;
}

Vec disturbance(const Vec& x, const CurrentSplit& split, const StackParams& p) {
  split.validate(p.n_seg);
  const StateLayout L{p.n_seg};
  if (x.size() != L.size()) throw DomainError("state size does not match the segment count");
  Vec z = Vec::Zero(L.size());
  const double pc_n2 = cathode_n2_pressure(split.total, p);
  for (int k = 0; k < p.n_seg; ++k) {
    const double mu = p.mu_segment(k);
    const double r = reaction_rate(split.per_segment[static_cast<std::size_t>(k)], p.n_cells, p.faraday);
    z[L.h2(k)] = -mu * r;
    z[L.total(k)] = -mu * r + mu * p.xi(k) * (pc_n2 + p.p_sat);
  }
  return z;
}

Mat input_map(const Vec& x, const StackParams& p) {
  check_state(x, p);
  const StateLayout L{p.n_seg};
  const int last = L.last();
  Mat g = Mat::Zero(L.size(), 2);
  const double cap = blower_capacity(x, p);
  const double frac = x[L.h2(last)] / x[L.total(last)];
  const double mu_n = p.mu_segment(last);
  const double mu_sm = p.mu_manifold();
  g(L.h2(last), 0) = -mu_n * cap * frac;
  g(L.total(last), 0) = -mu_n * cap;
  g(L.sm_h2(), 0) = mu_sm * cap * frac;
  g(L.sm(), 0) = mu_sm * cap;
  g(L.sm_h2(), 1) = mu_sm * p.tank_max_flow;
  g(L.sm(), 1) = mu_sm * p.tank_max_flow;
  return g;
}

Vec dynamics(const Vec& x, const InputVector& u, const CurrentSplit& split,
             const StackParams& p) {
  check_state(x, p);
  split.validate(p.n_seg);
  const double pc_n2 = cathode_n2_pressure(split.total, p);
  std::vector<double> dx;
  detail::plant_rates(to_std(x), u.u_bl, u.u_ht, split.per_segment, pc_n2, p, dx);
  return Eigen::Map<const Vec>(dx.data(), static_cast<Eigen::Index>(dx.size()));
}

Vec mass_balance_residual(const Vec& x, const StackParams& p) {
  check_state(x, p);
  const StateLayout L{p.n_seg};
  Vec r(p.n_seg);
  for (int k = 0; k < p.n_seg; ++k) {
    const double up = k == 0 ? x[L.sm()] : x[L.total(k - 1)];
    const double down = x[L.total(k)];
    // Outflow as seen by the upstream volume and inflow as seen downstream.
    const double out = orifice_flow(up, down, up, up, p.area_inlet, p.molar_mass_mix, p.alpha);
    const double in = p.m_inlet() * (up - down);
    r[k] = std::abs(out - in);
  }
  return r;
}

double total_moles(const Vec& x, const StackParams& p) {
  const StateLayout L{p.n_seg};
  double s = p.volume_manifold * x[L.sm()] / (p.gas_constant * p.temp_manifold);
  for (int k = 0; k < p.n_seg; ++k) {
    s += p.segment_volume(k) * x[L.total(k)] / (p.gas_constant * p.temp_anode);
  }
  return s;
}

}  // namespace fds
