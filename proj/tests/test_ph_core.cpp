#include "fds/controller.hpp"
#include "fds/ph_core.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fds;

TEST(Hamiltonian, TrivialValues) {
  const EnergyCoeffs k;
  EXPECT_EQ(hamiltonian(Vec::Zero(8), k), 0.0);
  EXPECT_EQ(hamiltonian(Vec::Ones(8), k), 4.0);
  EXPECT_EQ(grad_hamiltonian(Vec::Zero(8), k).norm(), 0.0);
  const Vec x = Vec::LinSpaced(8, 1e5, 1.2e5);
  EXPECT_EQ((grad_hamiltonian(x, k) - x).norm(), 0.0);
}

TEST(Hamiltonian, GradientMatchesCentralDifferences) {
  StackParams p;
  const EnergyCoeffs k{0.7, 1.3, 0.4, 2.0};
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    const Vec x = test::random_state(rng, p);
    const Vec g = grad_hamiltonian(x, k);
    Vec fd(x.size());
    for (int j = 0; j < x.size(); ++j) {
      const double h = 1.0;
      Vec a = x, b = x;
      a[j] += h;
      b[j] -= h;
      fd[j] = (hamiltonian(a, k) - hamiltonian(b, k)) / (2 * h);
    }
    EXPECT_LE((fd - g).norm(), 1e-6 * g.norm());
  }
}

// Coefficient matrix written out from the balance coefficients (three segments).
Mat direct_coefficients(const Vec& x, const StackParams& p) {
  const double m = p.m_inlet(), mb = p.m_bleed();
  const double mu = p.mu_segment(0), musm = p.mu_manifold();
  const double rho = p.rho(0), xi = p.xi(0);
  const double x1 = x[1], x2 = x[3], x3 = x[5], xsm = x[7];
  Mat A = Mat::Zero(8, 8);
  A(0, 0) = -mu * (m * (1 - x2 / x1) + rho);
  A(0, 6) = mu * m * (1 - x1 / xsm);
  A(1, 0) = mu * (xi - rho);
  A(1, 1) = -mu * (2 * m + xi);
  A(1, 3) = mu * m;
  A(1, 7) = mu * m;
  A(2, 0) = mu * m * (1 - x2 / x1);
  A(2, 2) = -mu * (m * (1 - x3 / x2) + rho);
  A(3, 1) = mu * m;
  A(3, 2) = mu * (xi - rho);
  A(3, 3) = -mu * (2 * m + xi);
  A(3, 5) = mu * m;
  A(4, 2) = mu * m * (1 - x3 / x2);
  A(4, 4) = -mu * (mb * (1 - p.p_atm / x3) + rho);
  A(5, 3) = mu * m;
  A(5, 4) = mu * (xi - rho);
  A(5, 5) = -mu * (m + mb * (1 - p.p_atm / x3) + xi);
  A(6, 6) = -musm * m * (1 - x1 / xsm);
  A(7, 1) = musm * m;
  A(7, 7) = -musm * m;
  return A;
}

TEST(Structure, CoefficientMatrixMatchesDirectAssembly) {
  StackParams p;
  p.k_cr_n2 = 2 * p.k_cr_h2;  // keep the xi - rho entries nonzero
  std::mt19937_64 rng(23);
  for (int i = 0; i < 20; ++i) {
    const Vec x = test::random_state(rng, p);
    const AuxCoeffs aux = aux_coefficients(x, p);
    const Mat A = direct_coefficients(x, p);
    const PHStructure st = build_structure(aux, EnergyCoeffs{}, input_map(x, p), {}, 1);
    EXPECT_LE((st.J - st.R - A).cwiseAbs().maxCoeff(), 1e-12 * A.cwiseAbs().maxCoeff());
    EXPECT_DOUBLE_EQ(st.J(0, 6), aux.a17() / 2);
    EXPECT_DOUBLE_EQ(st.R(0, 6), -aux.a17() / 2);
    EXPECT_EQ(skew_residual(st.J), 0.0);
    EXPECT_EQ(skew_residual(st.J_d), 0.0);
  }
}

TEST(Structure, WeightsScaleColumns) {
  StackParams p;
  const Vec x = test::nominal_state(p);
  const EnergyCoeffs k{0.5, 2.0, 0.25, 4.0};
  const AuxCoeffs aux = aux_coefficients(x, p);
  const PHStructure st = build_structure(aux, k, input_map(x, p), {}, 1);
  const Mat A = coefficient_matrix(aux);
  // (J - R) K = A, so the drift is unchanged by the weights.
  EXPECT_LE(((st.J - st.R) * k.weights(StateLayout{3}).asDiagonal() - A).cwiseAbs().maxCoeff(),
            1e-12 * A.cwiseAbs().maxCoeff());
}

TEST(Structure, AssignedInterconnectionEntries) {
  StackParams p;
  const Vec x = test::nominal_state(p);
  const AuxCoeffs aux = aux_coefficients(x, p);
  const PHStructure st = build_structure(aux, EnergyCoeffs{}, input_map(x, p), {}, 1);
  const double a76 = aux.h2_upstream[1] / 2, a87 = aux.total_h2[0] / 2;
  EXPECT_DOUBLE_EQ(st.J_a(5, 6), -a76);
  EXPECT_DOUBLE_EQ(st.J_a(6, 5), a76);
  EXPECT_DOUBLE_EQ(st.J_a(6, 7), -a87);
  EXPECT_DOUBLE_EQ(st.J_a(7, 6), a87);
  const PHStructure d = build_structure(aux, EnergyCoeffs{}, input_map(x, p), {3.0, 5.0}, 1);
  EXPECT_EQ(d.R_a(5, 5), 3.0);
  EXPECT_EQ(d.R_a(7, 7), 5.0);
  EXPECT_LE((d.R_d - d.R - d.R_a).norm(), 0.0);
}

TEST(Matching, TrivialAndAffine) {
  StackParams p;
  const Vec x = test::nominal_state(p);
  PHStructure st = build_structure(aux_coefficients(x, p), EnergyCoeffs{}, input_map(x, p), {}, 1);
  st.J_a.setZero();
  st.R_a.setZero();
  const Vec z = Vec::Zero(8);
  EXPECT_EQ(matching_residual(z, x, st, z, Eigen::Vector2d::Zero()).norm(), 0.0);
  const Eigen::Vector2d s1(0.2, 0.1), s2(0.5, 0.4);
  const Vec r1 = matching_residual(x, x, st, z, s1), r2 = matching_residual(x, x, st, z, s2);
  EXPECT_LE((r2 - r1 + st.G * (s2 - s1)).norm(), 1e-9 * r1.norm());
}

TEST(Matching, VanishesAtTarget) {
  StackParams p;
  p.tank_max_flow = 0.3;
  const CurrentSplit split = CurrentSplit::proportional(150.0, p.proportions);
  const DesiredTrajectory t = solve_desired(101200, 116200, split, p);
  const ControllerGains g;
  const EnergyShaping sh = make_shaping(t, g);
  const PHStructure st = build_structure(t.aux_d, g.energy, input_map(t.x_d, p), {}, 1);
  const Vec r = matching_residual(sh.grad(t.x_d), grad_hamiltonian(t.x_d, g.energy), st, t.zeta_d, t.u_d.vec());
  EXPECT_LE(r.norm(), 1e-6 * t.zeta_d.norm());
}

TEST(Conditions, NegativeGradientIsBoundaryCase) {
  const EnergyCoeffs k;
  const Vec xd = Vec::LinSpaced(8, 1e5, 1.2e5);
  const ConditionReport r = check_conditions(xd, [&](const Vec& x) { return Vec(-grad_hamiltonian(x, k)); }, k);
  EXPECT_LE(r.integrability, 1e-9);
  EXPECT_LE(r.equilibrium, 1e-9);
  EXPECT_NEAR(r.min_eig, 0.0, 1e-6);
}

TEST(Conditions, LinearOmegaIntegrabilityIndependentOfTarget) {
  const EnergyCoeffs k;
  Mat S = Mat::Identity(8, 8) * 2.0;
  S(0, 1) = S(1, 0) = 0.3;
  const auto omega = [&](const Vec& x) { return Vec(S * x); };
  const double a = check_conditions(Vec::Constant(8, 1e5), omega, k).integrability;
  const double b = check_conditions(Vec::Constant(8, 1.3e5), omega, k).integrability;
  EXPECT_LE(a, 1e-9);
  EXPECT_LE(b, 1e-9);
}

TEST(Conditions, ControllerShapingIsStrict) {
  StackParams p;
  p.tank_max_flow = 0.3;
  const DesiredTrajectory t = solve_desired(101200, 116200, CurrentSplit::proportional(150.0, p.proportions), p);
  const ControllerGains g;
  const EnergyShaping sh = make_shaping(t, g);
  const ConditionReport r = check_conditions(t.x_d, [&](const Vec& x) { return sh.grad(x); }, g.energy);
  EXPECT_LE(r.integrability, 1e-6);
  EXPECT_LE(r.equilibrium_rel, 1e-6);
  EXPECT_GT(r.min_eig, 0.0);
}

TEST(Ports, EquilibriumRatesAndSupply) {
  StackParams p;
  p.tank_max_flow = 0.3;
  const CurrentSplit split = CurrentSplit::proportional(250.0, p.proportions);
  const DesiredTrajectory t = solve_desired(101200, 116200, split, p);
  const auto ports = segment_ports(t.x_d, t.u_d, split, p, EnergyCoeffs{});
  ASSERT_EQ(ports.size(), 4u);
  double rate = 0.0, supply = 0.0;
  for (const auto& s : ports) {
    rate += s.energy_rate;
    supply += s.supply;
    EXPECT_NEAR(s.energy_rate, 0.0, 0.05);  // stationary to ~1e-7 Pa/s
  }
  EXPECT_LE(rate, supply + 1e-6 * std::abs(supply));
  EXPECT_GT(ports[0].supply, ports[1].supply);
  EXPECT_GT(ports[1].supply, ports[2].supply);
}

TEST(Ports, EnergyRateDecomposesIntoSupplyAndLoss) {
  StackParams p;
  std::mt19937_64 rng(29);
  for (int i = 0; i < 20; ++i) {
    const Vec x = test::random_state(rng, p);
    const InputVector u{0.2, 0.4};
    const auto ports = segment_ports(x, u, CurrentSplit::proportional(0.0, p.proportions), p, EnergyCoeffs{});
    // Without load or crossover, a segment changes energy only through its boundary flows.
    StackParams sealed = p;
    sealed.k_cr_h2 = sealed.k_cr_n2 = 0.0;
    const auto s = segment_ports(x, u, CurrentSplit::proportional(0.0, p.proportions), sealed, EnergyCoeffs{});
    for (const auto& port : s) EXPECT_NEAR(port.energy_rate, port.supply, 1e-9 * std::abs(port.supply) + 1e-6);
    EXPECT_EQ(ports.size(), 4u);
  }
}
