#pragma once

#include "fds/controller.hpp"
#include "fds/integrate.hpp"
#include "fds/model.hpp"

#include <cstdint>

namespace fds {

struct ObserverConfig {
  double alpha1 = 0.1;  // outlet channel
  double alpha2 = 1.0;  // manifold channel
  double lipschitz_n = 1e4;   // differentiator bound on the 4th derivative, outlet channel
  double lipschitz_sm = 1e4;  // manifold channel
  double condition_cap = 1e12;
  int gain_interval = 100;  // steps between gain refreshes

  void validate() const;
};

struct ObserverState {
  Vec x_hat;
  // Differentiator estimates e0..e3 per channel (rows: outlet, manifold).
  Eigen::Matrix<double, 2, 4> diff = Eigen::Matrix<double, 2, 4>::Zero();
  double alpha1 = 0.1;
  double alpha2 = 1.0;
  Mat l_ob;                // (2n+2) x 2
  bool gain_valid = false;
  int steps_since_gain = 0;
  Eigen::Vector2d nu = Eigen::Vector2d::Zero();
  bool projected = false;   // last step clipped a partial into [0, total]
  bool gain_fault = false;  // last gain refresh failed; previous gain kept
  double condition = 0.0;
};

ObserverState make_observer(const Vec& x_hat0, const ObserverConfig& cfg);

// (y, ydot, y'', y''') stacked pairwise as [y_n, y_sm, ydot_n, ydot_sm, ...],
// exact Lie derivatives along f(., u) with u and the currents frozen.
Vec output_derivatives(const Vec& x, const InputVector& u, const CurrentSplit& split,
                       const StackParams& params, int order);

struct ObserverGainReport {
  Mat jacobian_stack;  // rows follow output_derivatives(order 3)
  double condition_number = 0.0;  // of the row/column-equilibrated stack
  Mat l_ob;            // last two columns of the inverse stack
  bool ok = false;
};

ObserverGainReport observer_gain(const Vec& x_hat, const InputVector& u, const CurrentSplit& split,
                                 const StackParams& params, double condition_cap = 1e12);

// Correction law on the differentiator estimates e0..e3 of one channel.
double sliding_correction(double alpha, double e0, double e1, double e2, double e3);

// One explicit step of the third-order robust exact differentiator on the
// output error, followed by the correction law. Returns nu.
Eigen::Vector2d differentiator_step(const Eigen::Vector2d& y_err, ObserverState& s,
                                    const ObserverConfig& cfg, double dt);

// Advances x_hat by one step of xdot = f(x_hat, u) + l_ob nu (zeta is part of f).
void observer_step(ObserverState& s, const InputVector& u, const Eigen::Vector2d& y,
                   const CurrentSplit& split, const StackParams& params, const ObserverConfig& cfg,
                   double dt, Scheme scheme);

// The state-feedback law evaluated on the estimate, damping on the measurement.
ControlOutput output_feedback_control(const ObserverState& s, const Eigen::Vector2d& y,
                                      const DesiredTrajectory& traj, const ControllerGains& gains,
                                      const EnergyShaping& sh, const StackParams& params);

struct LipschitzReport {
  double rho1 = 0.0;     // drift (J - R) gradH
  double delta_a = 0.0;  // (J_a - R_a) gradH
  double delta_d = 0.0;  // (J_d - R_d) gradH_a
  int samples = 0;
};

// Largest sampled ratio |g(x) - g(x')| / |x - x'| over pairs drawn in the box [lo, hi].
LipschitzReport lipschitz_probe(const StackParams& params, const Vec& lo, const Vec& hi,
                                int samples, std::uint64_t seed, const EnergyShaping* sh = nullptr);

}  // namespace fds
