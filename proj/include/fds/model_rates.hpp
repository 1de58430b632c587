#pragma once

// Generic-scalar form of the plant balances. Instantiated with double for
// simulation and with Taylor<N> for exact output derivatives along the flow.

#include "fds/params.hpp"
#include "fds/state.hpp"
#include "fds/taylor.hpp"

#include <cmath>
#include <vector>

namespace fds::detail {

using std::exp;
using std::pow;

// W_bl,m / M as a function of the pressure ratio across the blower.
template <class T>
T blower_capacity_t(const T& p_ratio, const StackParams& p) {
  const BlowerParams& b = p.blower;
  const double tip = b.tip_speed();
  const double mach = tip / std::sqrt(b.gamma * b.specific_gas_constant * b.inlet_temperature);
  double phi_max = 0.0, beta = 0.0, psi_max = 0.0, mp = 1.0;
  for (int i = 0; i < 6; ++i) {
    if (i < 5) phi_max += b.a[i] * mp;
    if (i < 3) beta += b.b[i] * mp;
    psi_max += b.c[i] * mp;
    mp *= mach;
  }
  const double exponent = (b.gamma - 1.0) / b.gamma;
  const T psi = b.cp * b.inlet_temperature * (pow(p_ratio, exponent) - 1.0) / (0.5 * tip * tip);
  const T phi = phi_max * (1.0 - exp(beta * (psi / psi_max - 1.0)));
  const double area = 0.25 * 3.14159265358979323846 * b.diameter * b.diameter;
  return phi * (b.density * area * tip / p.molar_mass_mix);
}

// Writes dx/dt into `dx`. Inputs and currents are constants.
template <class T>
void plant_rates(const std::vector<T>& x, double u_bl, double u_ht,
                 const std::vector<double>& seg_current, double p_cathode_n2,
                 const StackParams& p, std::vector<T>& dx) {
  const int n = p.n_seg;
  const StateLayout L{n};
  dx.assign(static_cast<std::size_t>(L.size()), T(0.0));

  const double m_ej = p.m_inlet();
  const double m_seg = p.m_inlet();
  const double m_bd = p.m_bleed();
  const double mu_sm = p.mu_manifold();
  const int last = n - 1;

  // Total and hydrogen flows from the manifold into segment 1.
  const T& xsm = x[L.sm()];
  const T& xsm_h = x[L.sm_h2()];
  T in_tot = m_ej * (xsm - x[L.total(0)]);
  T in_h2 = in_tot * xsm_h / xsm;

  // Blower draws from the last segment into the manifold.
  const T cap = blower_capacity_t<T>(xsm / x[L.total(last)], p);
  const T bl_tot = u_bl * cap;
  const T bl_h2 = bl_tot * x[L.h2(last)] / x[L.total(last)];

  for (int k = 0; k < n; ++k) {
    const T& xk = x[L.total(k)];
    const T& xk_h = x[L.h2(k)];
    T out_tot, out_h2;
    if (k < last) {
      out_tot = m_seg * (xk - x[L.total(k + 1)]);
      out_h2 = out_tot * xk_h / xk;
    } else {
      const T bleed = m_bd * (xk - p.p_atm);
      out_tot = bleed + bl_tot;
      out_h2 = bleed * xk_h / xk + bl_h2;
    }
    const double reaction = p.n_cells * seg_current[static_cast<std::size_t>(k)] / (2.0 * p.faraday);
    const T cross_h2 = p.rho(k) * xk_h;
    // N2 partial on the anode side excludes the saturated vapour.
    const T cross_n2 = p.xi(k) * (p_cathode_n2 - (xk - xk_h - p.p_sat));
    const double mu = p.mu_segment(k);
    dx[L.h2(k)] = mu * (in_h2 - out_h2 - reaction - cross_h2);
    dx[L.total(k)] = mu * (in_tot - out_tot - reaction - cross_h2 + cross_n2);
    in_tot = out_tot;
    in_h2 = out_h2;
  }

  const double tank = u_ht * p.tank_max_flow;
  const T feed_tot = m_ej * (xsm - x[L.total(0)]);
  const T feed_h2 = feed_tot * xsm_h / xsm;
  dx[L.sm_h2()] = mu_sm * (tank + bl_h2 - feed_h2);
  dx[L.sm()] = mu_sm * (tank + bl_tot - feed_tot);
}

}  // namespace fds::detail
