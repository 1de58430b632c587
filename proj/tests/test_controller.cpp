#include "fds/controller.hpp"
#include "fds/integrate.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace fds;

namespace {

StackParams plant() {
  StackParams p;
  p.tank_max_flow = 0.3;
  return p;
}

ControllerGains weighted_gains() {
  ControllerGains g;
  g.energy.k_sm = g.energy.k_sm_h2 = 0.43854545454545446;
  return g;
}

DesiredTrajectory target(const StackParams& p, double amps) {
  return solve_desired(101200, 116200, CurrentSplit::proportional(amps, p.proportions), p);
}

}  // namespace

TEST(Phi, HandValues) {
  EXPECT_EQ(phi(0.0, 0.0, 1.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(phi(3.0, 3.0, 1.0, 2.0), 4.5);
  EXPECT_DOUBLE_EQ(phi(5.0, 2.0, 1.0, 2.0), 12.5 - 12.0);
  EXPECT_DOUBLE_EQ(phi_grad(2.0, 2.0, 1.0, 2.0), -2.0);
}

TEST(Phi, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(9e4, 1.2e5);
  for (int i = 0; i < 100; ++i) {
    const double x = d(rng), xd = d(rng), h = 0.5;
    const double fd = (phi(x + h, xd, 1.3, 2.1) - phi(x - h, xd, 1.3, 2.1)) / (2 * h);
    EXPECT_NEAR(fd, phi_grad(x, xd, 1.3, 2.1), 1e-6 * std::abs(fd) + 1e-6);
  }
}

TEST(Kernels, ZeroDisturbanceLeavesLinearTerm) {
  const StackParams p = plant();
  const DesiredTrajectory t = target(p, 150.0);
  const Vec& x = t.x_d;
  const AuxCoeffs& a = t.aux_d;
  const Vec z = Vec::Zero(x.size());
  const EnergyCoeffs k{1.0, 1.0, 0.5, 1.0};
  EXPECT_DOUBLE_EQ(f1(x, a, z, k), -x[6] * 0.5 / a.a11());
  EXPECT_DOUBLE_EQ(f2(x, a, z, k, 2), x[2] / a.a31(1));
}

TEST(Kernels, MatchHandAssembledFormula) {
  const StackParams p = plant();
  const DesiredTrajectory t = target(p, 250.0);
  const Vec& x = t.x_d;
  const AuxCoeffs& a = t.aux_d;
  const EnergyCoeffs k;
  const double b = a.a17() * x[0] + a.a11() * x[6];
  const double want1 = -t.zeta_d[0] * (1 + std::log(b)) / (a.a11() * a.a17()) - x[6] / a.a11();
  EXPECT_NEAR(f1(x, a, t.zeta_d, k), want1, 1e-12 * std::abs(want1));
  const double c = a.a31(1) * x[2] + a.a33(1) * x[0];
  const double want2 = t.zeta_d[2] * (1 + std::log(c)) / (a.a31(1) * a.a33(1)) + x[2] / a.a31(1);
  EXPECT_NEAR(f2(x, a, t.zeta_d, k, 2), want2, 1e-12 * std::abs(want2));
  EXPECT_THROW(f2(x, a, t.zeta_d, k, 1), DomainError);
}

TEST(Kernels, NegativeLogArgumentThrows) {
  const StackParams p = plant();
  const Vec x = test::nominal_state(p);  // uniform H2 fractions: c < 0
  const AuxCoeffs a = aux_coefficients(x, p);
  EXPECT_THROW(f2(x, a, Vec::Zero(x.size()), EnergyCoeffs{}, 2), DomainError);
}

TEST(Desired, SolveIsStationaryAndPinsOutputs) {
  const StackParams p = plant();
  for (double amps : {50.0, 150.0, 250.0}) {
    const DesiredTrajectory t = target(p, amps);
    EXPECT_DOUBLE_EQ(t.x_d[5], 101200);
    EXPECT_DOUBLE_EQ(t.x_d[7], 116200);
    const Vec f = dynamics(t.x_d, t.u_d, t.split, p);
    EXPECT_LE(f.cwiseAbs().maxCoeff(), 1e-6) << amps;
    EXPECT_GE(t.u_d.u_bl, 0.0);
    EXPECT_LE(t.u_d.u_bl, 1.0);
    EXPECT_GE(t.u_d.u_ht, 0.0);
    EXPECT_LE(t.u_d.u_ht, 1.0);
    EXPECT_TRUE(state_feasible(t.x_d, StateLayout{3}));
    // Pressures fall along the channel.
    EXPECT_GT(t.x_d[7], t.x_d[1]);
    EXPECT_GT(t.x_d[1], t.x_d[3]);
    EXPECT_GT(t.x_d[3], t.x_d[5]);
  }
}

TEST(Desired, UnreachableTargetThrows) {
  StackParams p;
  p.tank_max_flow = 1e-6;
  EXPECT_THROW(target(p, 250.0), DomainError);
}

TEST(Shaping, EquilibriumAssignedAtTarget) {
  const StackParams p = plant();
  for (const ControllerGains& g : {ControllerGains{}, weighted_gains()}) {
    const DesiredTrajectory t = target(p, 150.0);
    const EnergyShaping sh = make_shaping(t, g);
    const Vec omega = sh.grad(t.x_d);
    const Vec gh = grad_hamiltonian(t.x_d, g.energy);
    EXPECT_LE((omega + gh).norm(), 1e-9 * gh.norm());
    EXPECT_NEAR(closed_loop_energy(t.x_d, sh), 0.0, 1e-6);
    EXPECT_LE(closed_loop_energy_grad(t.x_d, sh).norm(), 1e-9 * gh.norm());
  }
}

TEST(Shaping, GradientMatchesCentralDifferences) {
  const StackParams p = plant();
  const DesiredTrajectory t = target(p, 250.0);
  const EnergyShaping sh = make_shaping(t, weighted_gains());
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const Vec x = random_state_near(rng, t.x_d, 2000.0, p);
    const Vec g = sh.grad(x);
    for (int j = 0; j < x.size(); ++j) {
      const double h = 1.0;
      Vec a = x, b = x;
      a[j] += h;
      b[j] -= h;
      const double fd = (sh.energy(a) - sh.energy(b)) / (2 * h);
      EXPECT_NEAR(fd, g[j], 1e-6 * (std::abs(g[j]) + 1.0)) << j;
    }
  }
}

TEST(Shaping, ClosedLoopEnergyHasStrictMinimum) {
  const StackParams p = plant();
  const DesiredTrajectory t = target(p, 150.0);
  const EnergyShaping sh = make_shaping(t, weighted_gains());
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Vec x = random_state_near(rng, t.x_d, 500.0, p);
    EXPECT_GT(closed_loop_energy(x, sh), 0.0);
  }
}

TEST(Guards, MatchDirectInequalities) {
  const StackParams p = plant();
  const DesiredTrajectory t = target(p, 150.0);
  const EnergyShaping sh = make_shaping(t, ControllerGains{});
  std::mt19937_64 rng(11);
  const double mu = p.mu_segment(0), m = p.m_inlet();
  for (int i = 0; i < 200; ++i) {
    const Vec x = test::random_state(rng, p);
    const GuardFlags g = singularity_guard(x, t, sh, p);
    EXPECT_EQ(g.sm_above_first, x[7] > x[1]);
    EXPECT_EQ(g.q_ordering, x[1] > x[3]);
    EXPECT_EQ(g.first_segment_positive, (mu * p.rho(0) + mu * m) * x[1] + mu * m * x[3] > 0);
    EXPECT_EQ(g.outlet_condition, mu * m * x[5] - (mu * m + p.rho(1)) * x[3] > 0);
    EXPECT_EQ(g.h2_above_target, x[4] > t.x_nd_h2);
    EXPECT_EQ(g.log_b_positive, sh.a17 * x[0] + sh.a11 * x[6] > 0);
    EXPECT_EQ(g.log_c_positive, sh.a31 * x[2] + sh.a33 * x[0] > 0);
  }
}

TEST(Control, HoldsTargetInput) {
  const StackParams p = plant();
  for (const ControllerGains& g : {ControllerGains{}, weighted_gains()}) {
    const DesiredTrajectory t = target(p, 250.0);
    const EnergyShaping sh = make_shaping(t, g);
    const ControlOutput c =
        state_feedback_control(t.x_d, t.y_d(), t, g, sh, disturbance(t.x_d, t.split, p), p);
    ASSERT_FALSE(c.fault) << c.fault_reason;
    EXPECT_NEAR(c.u_raw.u_bl, t.u_d.u_bl, 1e-9);
    EXPECT_NEAR(c.u_raw.u_ht, t.u_d.u_ht, 1e-9);
  }
}

TEST(Control, DampingInjectionAddsItsOwnTerms) {
  const StackParams p = plant();
  const DesiredTrajectory t = target(p, 150.0);
  ControllerGains g = weighted_gains();
  const Mat G = input_map(t.x_d, p);
  EXPECT_EQ(assigned_damping_term(G, t, g).norm(), 0.0);
  const EnergyShaping sh = make_shaping(t, g);
  const Vec zeta = disturbance(t.x_d, t.split, p);
  const ControlOutput base = state_feedback_control(t.x_d, t.y_d(), t, g, sh, zeta, p);
  g.k_n1 = 1e-7;
  g.k_sm1 = 2e-7;
  const Eigen::Vector2d y(101250, 116100);
  const ControlOutput c = state_feedback_control(t.x_d, y, t, g, sh, zeta, p);
  // Left inverse through the normal equations.
  const Vec r = assigned_damping_term(G, t, g);
  const Eigen::Vector2d gr = (G.transpose() * G).ldlt().solve(G.transpose() * r);
  const Eigen::Vector2d want = base.u_raw.vec() + gr - g.r_ai() * y;
  EXPECT_NEAR(c.u_raw.u_bl, want[0], 1e-9);
  EXPECT_NEAR(c.u_raw.u_ht, want[1], 1e-9);
  EXPECT_DOUBLE_EQ(r[5], G(5, 0) * 1e-7 * 101200);
  EXPECT_DOUBLE_EQ(r[7], G(7, 1) * 2e-7 * 116200);
}

TEST(Control, RegulatesSmallOffset) {
  const StackParams p = plant();
  const ControllerGains g = weighted_gains();
  const DesiredTrajectory t = target(p, 150.0);
  const EnergyShaping sh = make_shaping(t, g);
  Vec x = t.x_d;
  x[5] += 200;
  x[7] -= 300;
  const double dt = 2.5e-4;
  const double v0 = closed_loop_energy(x, sh);
  for (int i = 0; i < 40000; ++i) {
    const ControlOutput c = state_feedback_control(x, Eigen::Vector2d(x[5], x[7]), t, g, sh,
                                                   disturbance(x, t.split, p), p);
    ASSERT_FALSE(c.fault);
    x = integrate_step(x, [&](const Vec& s) { return dynamics(s, c.u, t.split, p); }, dt, Scheme::rk4);
  }
  EXPECT_LT(closed_loop_energy(x, sh), 1e-3 * v0);
  EXPECT_LT(std::abs(x[5] - 101200), 5.0);
  EXPECT_LT(std::abs(x[7] - 116200), 5.0);
}
