#pragma once

#include "fds/params.hpp"
#include "fds/state.hpp"
#include "fds/types.hpp"

#include <vector>

namespace fds {

// Orifice molar flow alpha*A/M * (p_up - p_down) * (p_species_up / p_total_up).
double orifice_flow(double p_up, double p_down, double p_species_up, double p_total_up,
                    double area, double molar_mass, double alpha);

// Hydrogen consumed by a segment carrying current i_k: N_fc I_k / (2F).
double reaction_rate(double i_k, double n_cells, double faraday);

// Membrane permeation t_k N_fc k_cr (p_high - p_low).
double crossover_rate(double t_k, double n_cells, double k_cr, double p_high, double p_low);

// Cathode nitrogen mole fraction at stack current I.
double cathode_n2_fraction(double current, const StackParams& params);
// Partial pressure of N2 on the cathode side, x_c,N2 (P_c - P_sat).
double cathode_n2_pressure(double current, const StackParams& params);

// Intermediate quantities of the blower map at one operating point.
struct BlowerPoint {
  double mach = 0.0;
  double phi_max = 0.0;
  double beta = 0.0;
  double psi_max = 0.0;
  double psi = 0.0;
  double phi = 0.0;
  double mass_flow_max = 0.0;  // W_bl,m, kg/s
};

BlowerPoint blower_map(double inlet_temp, double p_ratio, double tip_speed,
                       const StackParams& params);

// Molar flow delivered by the blower: u_bl * W_bl,m / M.
double blower_flow(double u_bl, double inlet_temp, double p_ratio, double tip_speed,
                   const StackParams& params);

// Full-command molar flow of the blower at the state's pressure ratio xsm/xn.
double blower_capacity(const Vec& x, const StackParams& params);

// State-dependent coefficients of the linear-in-state form of the model.
// Per-segment families are indexed by 0-based segment k; for the three-segment
// case the classic names map as
//   a11 = h2_diag[0], a17 = h2_upstream[0], a21 = total_h2[0], a22 = total_diag[0],
//   a24 = total_next[0], a28 = total_prev[0], a31 = h2_upstream[1], a33 = h2_diag[1],
//   a42 = total_prev[1], a43 = total_h2[1], a44 = total_diag[1], a46 = total_next[1],
//   a53 = h2_upstream[2], a55 = h2_diag[2], a64 = total_prev[2], a65 = total_h2[2],
//   a66 = total_diag[2].
struct AuxCoeffs {
  int n_seg = 0;
  std::vector<double> h2_diag;      // coefficient of x_k,H2 in its own row
  std::vector<double> h2_upstream;  // of xsm,H2 (k=0) or x_{k-1},H2
  std::vector<double> total_h2;     // of x_k,H2 in the total-pressure row
  std::vector<double> total_diag;   // of x_k in its own row
  std::vector<double> total_prev;   // of xsm (k=0) or x_{k-1}
  std::vector<double> total_next;   // of x_{k+1}; unused for the last segment
  double a77 = 0.0;
  double a82 = 0.0;
  double a88 = 0.0;

  // Constant families.
  std::vector<double> mu;   // RT_a/V_ak
  double mu_sm = 0.0;
  double m_ej = 0.0;        // manifold -> first segment
  double m_seg = 0.0;       // segment -> segment
  double m_bleed = 0.0;
  std::vector<double> rho;  // H2 permeation
  std::vector<double> xi;   // N2 permeation

  Vec zeta;  // disturbance, filled when a current split is supplied

  // Named accessors for the q-th (0-based) middle segment.
  double a11() const { return h2_diag[0]; }
  double a17() const { return h2_upstream[0]; }
  double a21() const { return total_h2[0]; }
  double a22() const { return total_diag[0]; }
  double a24() const { return total_next[0]; }
  double a28() const { return total_prev[0]; }
  double a31(int q) const { return h2_upstream.at(q); }
  double a33(int q) const { return h2_diag.at(q); }
  double a42(int q) const { return total_prev.at(q); }
  double a43(int q) const { return total_h2.at(q); }
  double a44(int q) const { return total_diag.at(q); }
  double a46(int q) const { return total_next.at(q); }
  double a53() const { return h2_upstream.back(); }
  double a55() const { return h2_diag.back(); }
  double a64() const { return total_prev.back(); }
  double a65() const { return total_h2.back(); }
  double a66() const { return total_diag.back(); }
};

// Throws SingularityError naming the state if any total pressure is <= 0.
AuxCoeffs aux_coefficients(const Vec& x, const StackParams& params);
AuxCoeffs aux_coefficients(const Vec& x, const CurrentSplit& split, const StackParams& params);

// Known disturbance vector; the manifold rows are always zero.
Vec disturbance(const Vec& x, const CurrentSplit& split, const StackParams& params);

// Actuator map G(x), (2n+2) x 2, columns (u_bl, u_ht).
Mat input_map(const Vec& x, const StackParams& params);

// State derivative from the molar balances of every volume.
Vec dynamics(const Vec& x, const InputVector& u, const CurrentSplit& split,
             const StackParams& params);

// Per node (manifold->1, 1->2, ..., (n-1)->n): |outflow of the upstream
// volume - inflow of the downstream volume| in mol/s, total gas.
Vec mass_balance_residual(const Vec& x, const StackParams& params);

// Sum of V_k P_k / (R T_k) over every volume, mol.
double total_moles(const Vec& x, const StackParams& params);

}  // namespace fds

#include "fds/model_rates.hpp"
