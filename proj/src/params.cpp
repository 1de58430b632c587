#include "fds/params.hpp"

#include "fds/types.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

namespace fds {

double BlowerParams::tip_speed() const {
  return std::numbers::pi * diameter * shaft_speed_rpm / 60.0;
}

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("parameter '") + name + "' must be finite and > 0");
  }
}

// name -> member accessor, shared by entries() and set().
template <class P>
std::vector<std::pair<std::string, std::function<double&(P&)>>> scalar_table() {
  using F = std::function<double&(P&)>;
  std::vector<std::pair<std::string, F>> t = {
      {"alpha", [](P& p) -> double& { return p.alpha; }},
      {"area_inlet", [](P& p) -> double& { return p.area_inlet; }},
      {"area_bleed", [](P& p) -> double& { return p.area_bleed; }},
      {"area_cathode", [](P& p) -> double& { return p.area_cathode; }},
      {"volume_anode", [](P& p) -> double& { return p.volume_anode; }},
      {"volume_cathode", [](P& p) -> double& { return p.volume_cathode; }},
      {"volume_manifold", [](P& p) -> double& { return p.volume_manifold; }},
      {"temp_anode", [](P& p) -> double& { return p.temp_anode; }},
      {"temp_manifold", [](P& p) -> double& { return p.temp_manifold; }},
      {"faraday", [](P& p) -> double& { return p.faraday; }},
      {"gas_constant", [](P& p) -> double& { return p.gas_constant; }},
      {"k_cr_h2", [](P& p) -> double& { return p.k_cr_h2; }},
      {"k_cr_n2", [](P& p) -> double& { return p.k_cr_n2; }},
      {"tank_max_flow", [](P& p) -> double& { return p.tank_max_flow; }},
      {"n_cells", [](P& p) -> double& { return p.n_cells; }},
      {"p_sat", [](P& p) -> double& { return p.p_sat; }},
      {"p_atm", [](P& p) -> double& { return p.p_atm; }},
      {"p_cathode", [](P& p) -> double& { return p.p_cathode; }},
      {"molar_mass_h2", [](P& p) -> double& { return p.molar_mass_h2; }},
      {"molar_mass_n2", [](P& p) -> double& { return p.molar_mass_n2; }},
      {"molar_mass_o2", [](P& p) -> double& { return p.molar_mass_o2; }},
      {"molar_mass_h2o", [](P& p) -> double& { return p.molar_mass_h2o; }},
      {"molar_mass_mix", [](P& p) -> double& { return p.molar_mass_mix; }},
      {"x_cathode_h2o", [](P& p) -> double& { return p.x_cathode_h2o; }},
      {"blower.diameter", [](P& p) -> double& { return p.blower.diameter; }},
      {"blower.shaft_speed_rpm", [](P& p) -> double& { return p.blower.shaft_speed_rpm; }},
      {"blower.inlet_temperature", [](P& p) -> double& { return p.blower.inlet_temperature; }},
      {"blower.gamma", [](P& p) -> double& { return p.blower.gamma; }},
      {"blower.cp", [](P& p) -> double& { return p.blower.cp; }},
      {"blower.specific_gas_constant",
       [](P& p) -> double& { return p.blower.specific_gas_constant; }},
      {"blower.density", [](P& p) -> double& { return p.blower.density; }},
  };
  for (std::size_t i = 0; i < 5; ++i) {
    t.emplace_back("blower.a" + std::to_string(i), [i](P& p) -> double& { return p.blower.a[i]; });
  }
  for (std::size_t i = 0; i < 3; ++i) {
    t.emplace_back("blower.b" + std::to_string(i), [i](P& p) -> double& { return p.blower.b[i]; });
  }
  for (std::size_t i = 0; i < 6; ++i) {
    t.emplace_back("blower.c" + std::to_string(i), [i](P& p) -> double& { return p.blower.c[i]; });
  }
  return t;
}

}  // namespace

void StackParams::validate() const {
  require_positive(alpha, "alpha");
  require_positive(area_inlet, "area_inlet");
  // A closed bleed (area 0) is allowed so the fuel path can be sealed.
  if (!(area_bleed >= 0.0) || !std::isfinite(area_bleed)) {
    throw ConfigError("parameter 'area_bleed' must be finite and >= 0");
  }
  require_positive(area_cathode, "area_cathode");
  require_positive(volume_anode, "volume_anode");
  require_positive(volume_cathode, "volume_cathode");
  require_positive(volume_manifold, "volume_manifold");
  require_positive(temp_anode, "temp_anode");
  require_positive(temp_manifold, "temp_manifold");
  require_positive(faraday, "faraday");
  require_positive(gas_constant, "gas_constant");
  require_positive(n_cells, "n_cells");
  require_positive(molar_mass_mix, "molar_mass_mix");
  require_positive(blower.diameter, "blower.diameter");
  require_positive(blower.inlet_temperature, "blower.inlet_temperature");
  require_positive(blower.gamma, "blower.gamma");
  require_positive(blower.specific_gas_constant, "blower.specific_gas_constant");
  if (k_cr_h2 < 0.0 || k_cr_n2 < 0.0) throw ConfigError("permeation rates must be >= 0");
  if (tank_max_flow < 0.0) throw ConfigError("parameter 'tank_max_flow' must be >= 0");
  if (n_seg < 2) throw ConfigError("n_seg must be >= 2");
  if (static_cast<int>(proportions.size()) != n_seg) {
    throw ConfigError("proportions must have n_seg entries");
  }
  for (double t : proportions) {
    if (!(t > 0.0)) throw ConfigError("every segment proportion must be > 0");
  }
  const double sum = std::accumulate(proportions.begin(), proportions.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("segment proportions must sum to 1");
  if (x_cathode_h2o < 0.0 || x_cathode_h2o >= 1.0) {
    throw ConfigError("x_cathode_h2o must lie in [0, 1)");
  }
}

void StackParams::set_uniform_segments(int n) {
  n_seg = n;
  proportions.assign(static_cast<std::size_t>(std::max(n, 0)), n > 0 ? 1.0 / n : 0.0);
}

std::vector<std::pair<std::string, double>> StackParams::entries() const {
  StackParams copy = *this;
  std::vector<std::pair<std::string, double>> out;
  for (auto& [name, get] : scalar_table<StackParams>()) out.emplace_back(name, get(copy));
  out.emplace_back("n_seg", n_seg);
  for (int k = 0; k < n_seg; ++k) {
    out.emplace_back("t" + std::to_string(k + 1), proportions.at(k));
  }
  return out;
}

bool StackParams::set(const std::string& name, double value) {
  for (auto& [key, get] : scalar_table<StackParams>()) {
    if (key == name) {
      get(*this) = value;
      return true;
    }
  }
  if (name == "n_seg") {
    if (value != std::floor(value)) throw ConfigError("n_seg must be an integer");
    set_uniform_segments(static_cast<int>(value));
    return true;
  }
  if (name.size() > 1 && name[0] == 't') {
    const std::string idx = name.substr(1);
    if (!idx.empty() && idx.find_first_not_of("0123456789") == std::string::npos) {
      const int k = std::stoi(idx) - 1;
      if (k < 0 || k >= n_seg) throw ConfigError("segment proportion index out of range: " + name);
      proportions[static_cast<std::size_t>(k)] = value;
      return true;
    }
  }
  return false;
}

}  // namespace fds
