#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace fds {

// Recirculation blower: compressor-map regression plus the operating point
// (tip speed, inlet conditions, gas properties) the map is evaluated at.
struct BlowerParams {
  std::array<double, 5> a{2.21e-03, -4.64e-05, -5.36e-04, 2.70e-04, -3.70e-04};
  std::array<double, 3> b{2.44, -1.31, 1.77};
  std::array<double, 6> c{0.43, -0.68, 0.80, -0.43, 0.11, -9.79e-03};
  double diameter = 0.2286;        // m
  double shaft_speed_rpm = 33000;  // tip speed U = pi d rpm / 60
  double inlet_temperature = 298;  // K
  double gamma = 1.4;              // cp/cv
  double cp = 1004;                // J/(kg K)
  double specific_gas_constant = 287;  // J/(kg K), used in the Mach-like index
  double density = 1.2;            // kg/m^3

  double tip_speed() const;
};

// Physical constants of the stack and its fuel path. Defaults describe the
// reference stack; the few without a measured value are placeholders. All are
// overridable from a scenario.
struct StackParams {
  double alpha = 0.01;      // lumped orifice coefficient
  double area_inlet = 8.04e-06;   // A_ai, manifold->segment and segment->segment orifices, m^2
  double area_bleed = 7.24e-05;   // A_bd, m^2 (0 = bleed closed)
  double area_cathode = 7.24e-06; // A_or, m^2
  double volume_anode = 1.1e-04;     // m^3, split over segments by `proportions`
  double volume_cathode = 1.9e-04;   // m^3
  double volume_manifold = 1.608e-05;  // m^3
  double temp_anode = 298;     // K
  double temp_manifold = 298;  // K
  double faraday = 96485;      // C/mol
  double gas_constant = 8.314; // J/(mol K)
  double k_cr_h2 = 7.455e-12;  // mol/(Pa s)
  double k_cr_n2 = 7.455e-12;  // mol/(Pa s)
  double tank_max_flow = 2.5e-03;  // eta_ht,m, mol/s
  double n_cells = 25;
  double p_sat = 1.762e04;  // Pa, also the anode vapour pressure
  double p_atm = 1.01e05;   // Pa
  double p_cathode = 1.5e05;  // Pa, cathode nominal pressure
  double molar_mass_h2 = 2.016e-3;   // kg/mol
  double molar_mass_n2 = 28.013e-3;
  double molar_mass_o2 = 31.999e-3;
  double molar_mass_h2o = 18.015e-3;
  double molar_mass_mix = 9.8e-3;    // gas through the anode orifices and blower
  double x_cathode_h2o = 0.1;
  int n_seg = 3;
  std::vector<double> proportions{1.0 / 3, 1.0 / 3, 1.0 / 3};  // t_k
  BlowerParams blower;

  // Throws ConfigError naming the first violated invariant.
  void validate() const;

  double segment_volume(int k) const { return proportions.at(k) * volume_anode; }
  // RT/V factors.
  double mu_segment(int k) const { return gas_constant * temp_anode / segment_volume(k); }
  double mu_manifold() const { return gas_constant * temp_manifold / volume_manifold; }
  // Orifice conductances alpha*A/M.
  double m_inlet() const { return alpha * area_inlet / molar_mass_mix; }
  double m_bleed() const { return alpha * area_bleed / molar_mass_mix; }
  double rho(int k) const { return proportions.at(k) * n_cells * k_cr_h2; }
  double xi(int k) const { return proportions.at(k) * n_cells * k_cr_n2; }

  // Resets proportions to n equal shares.
  void set_uniform_segments(int n);

  // Flat name/value listing of every scalar parameter, in a fixed order.
  std::vector<std::pair<std::string, double>> entries() const;
  // Sets a parameter by the name used in entries(); false if unknown.
  bool set(const std::string& name, double value);
};

}  // namespace fds
