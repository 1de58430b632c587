#pragma once

#include "fds/model.hpp"
#include "fds/ph_core.hpp"

#include <optional>
#include <string>

namespace fds {

struct ControllerGains {
  double beta1 = 1.0;
  double beta2 = 2.0;
  double k_n1 = 0.0;   // damping injected on the outlet channel
  double k_sm1 = 0.0;  // damping injected on the manifold channel
  int q = 2;           // 1-based middle segment used by the shaped energy
  double completion = 1.0;  // curvature of the quadratic terms pinning the free coordinates
  EnergyCoeffs energy;

  void validate(int n_seg) const;
  Eigen::Matrix2d r_ai() const { return Eigen::Vector2d(k_n1, k_sm1).asDiagonal(); }
};

// Target operating point: the outputs (x_nd, x_smd) plus the remaining states
// and inputs that hold them in equilibrium at the given current.
struct DesiredTrajectory {
  double x_nd = 0.0;
  double x_smd = 0.0;
  double x_nd_h2 = 0.0;
  Eigen::Vector2d y_d_dot = Eigen::Vector2d::Zero();
  Vec x_d;
  InputVector u_d;
  CurrentSplit split;
  AuxCoeffs aux_d;
  Vec zeta_d;

  Eigen::Vector2d y_d() const { return {x_nd, x_smd}; }
};

// Newton solve of dynamics(x_d, u_d) = 0 with the two outputs pinned.
// `guess` (full state) seeds the iteration when given. Throws DomainError if
// the required inputs leave [0, 1] or the solve fails.
DesiredTrajectory solve_desired(double x_nd, double x_smd, const CurrentSplit& split,
                                const StackParams& params, const Vec* guess = nullptr);

double phi(double x_n_h2, double x_nd_h2, double beta1, double beta2);
double phi_grad(double x_n_h2, double x_nd_h2, double beta1, double beta2);

// Linear kernels of the shaped energy; constant for a fixed target.
double f1(const Vec& x_d, const AuxCoeffs& aux_d, const Vec& zeta_d, const EnergyCoeffs& k);
double f2(const Vec& x_d, const AuxCoeffs& aux_d, const Vec& zeta_d, const EnergyCoeffs& k, int q);

// Everything the shaped energy needs, frozen at one target.
struct EnergyShaping {
  int n_seg = 0;
  int q0 = 1;          // 0-based
  bool use_c = false;  // the middle-segment log term (needs 1 <= q0 <= n-2)
  double a11 = 0, a17 = 0, a31 = 0, a33 = 0;
  double kappa1 = 0, kappa2 = 0;
  double f1 = 0, f2 = 0;
  double beta1 = 1, beta2 = 2, gamma = 1;
  double x_nd_h2 = 0;
  Vec x_d;
  Vec slope;  // linear completion term per coordinate (0 where unused)
  std::vector<bool> free_coord;
  EnergyCoeffs k;

  double b(const Vec& x) const;
  double c(const Vec& x) const;
  double energy(const Vec& x) const;  // H_a
  Vec grad(const Vec& x) const;       // Omega
};

EnergyShaping make_shaping(const DesiredTrajectory& traj, const ControllerGains& gains);

struct GuardFlags {
  // Initial-condition constraints on the controller denominators.
  bool sm_above_first = false;
  bool first_segment_positive = false;
  bool q_ordering = false;
  bool outlet_condition = false;
  bool h2_above_target = false;
  // Arguments of the logarithms in the shaped energy.
  bool log_b_positive = false;
  bool log_c_positive = false;

  bool initial_constraints() const {
    return sm_above_first && first_segment_positive && q_ordering && outlet_condition &&
           h2_above_target;
  }
  // What the control law itself needs to be evaluable.
  bool usable() const { return log_b_positive && log_c_positive; }
  int bits() const;
};

GuardFlags singularity_guard(const Vec& x, const DesiredTrajectory& traj, const EnergyShaping& sh,
                             const StackParams& params);

struct ControlOutput {
  InputVector u_raw;
  InputVector u;  // clamped to [0, 1]
  Vec omega;
  double H_a = 0.0;
  GuardFlags guards;
  bool fault = false;
  std::string fault_reason;
};

// -R_a (Omega + gradH), evaluated in closed form so the assigned damping stays
// finite at the target where its denominators vanish.
Vec assigned_damping_term(const Mat& G, const DesiredTrajectory& traj, const ControllerGains& gains);

// Assigned damping entries at x (for reporting). nullopt when a denominator vanishes.
std::optional<AssignedDamping> assigned_damping(const Vec& x, const Vec& omega, const Mat& G,
                                                const DesiredTrajectory& traj,
                                                const ControllerGains& gains);

// Evaluates the structure/energy terms at x_s (true state or estimate) and the
// damping term on the measured outputs y.
ControlOutput state_feedback_control(const Vec& x_s, const Eigen::Vector2d& y,
                                     const DesiredTrajectory& traj, const ControllerGains& gains,
                                     const EnergyShaping& sh, const Vec& zeta,
                                     const StackParams& params);

// H + H_a - (H + H_a)(x_d): nonnegative near the target.
double closed_loop_energy(const Vec& x, const EnergyShaping& sh);
Vec closed_loop_energy_grad(const Vec& x, const EnergyShaping& sh);

}  // namespace fds
