#pragma once

#include "fds/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fds {

// Quadratic energy weights: H = 1/2 sum k_i x_i^2.
struct EnergyCoeffs {
  double k_j_h2 = 1.0;
  double k_j = 1.0;
  double k_sm_h2 = 1.0;
  double k_sm = 1.0;

  void validate() const;
  Vec weights(const StateLayout& layout) const;
};

double hamiltonian(const Vec& x, const EnergyCoeffs& k);
Vec grad_hamiltonian(const Vec& x, const EnergyCoeffs& k);

// Diagonal entries of R_a on the outlet and manifold total-pressure rows.
struct AssignedDamping {
  double k66 = 0.0;
  double k88 = 0.0;
};

struct PHStructure {
  Mat J, R, J_a, R_a, J_d, R_d;
  Mat G;  // (2n+2) x 2
  Mat C;  // 2 x (2n+2), selects (x_n, x_sm)
};

// Coefficient matrix A with xdot = A x + G u + zeta, assembled row by row.
Mat coefficient_matrix(const AuxCoeffs& aux);

// Output selection matrix for (x_n, x_sm).
Mat output_matrix(const StateLayout& layout);

// J, R from the coefficient matrix (scaled by the energy weights), J_a
// coupling the outlet, manifold H2 and manifold rows via the segment-q and
// segment-1 coefficients, R_a from the assigned damping. q is 0-based.
PHStructure build_structure(const AuxCoeffs& aux, const EnergyCoeffs& k, const Mat& G,
                            const AssignedDamping& damping, int q);

// (J_d - R_d) Omega + (J_a - R_a) gradH - G sigma - zeta.
Vec matching_residual(const Vec& omega, const Vec& grad_h, const PHStructure& s,
                      const Vec& zeta, const Eigen::Vector2d& sigma);

double skew_residual(const Mat& m);  // max |m + m^T|
double min_sym_eigenvalue(const Mat& m);  // of (m + m^T)/2

struct ConditionReport {
  double integrability = 0.0;     // max |dOmega - dOmega^T| / max(1, max |dOmega|)
  double equilibrium = 0.0;       // |Omega(x_d) + gradH(x_d)|
  double equilibrium_rel = 0.0;   // the same divided by |gradH(x_d)|
  double min_eig = 0.0;           // of sym(dOmega) + hess H at x_d
  Mat jacobian;                   // numerical dOmega at x_d
};

// Central-difference check of the closed-loop energy conditions at x_d.
ConditionReport check_conditions(const Vec& x_d, const std::function<Vec(const Vec&)>& omega_fn,
                                 const EnergyCoeffs& k);

// Port variables of one segment: the boundary flows (as pressure rates) are
// the input, the weighted pressures the output.
struct SegmentPort {
  double energy = 0.0;      // 1/2 k x_h2^2 + 1/2 k x^2
  double energy_rate = 0.0; // y . xdot
  double supply = 0.0;      // u_s . y_s
};

// Ports for every segment followed by the manifold (index n).
std::vector<SegmentPort> segment_ports(const Vec& x, const InputVector& u,
                                       const CurrentSplit& split, const StackParams& params,
                                       const EnergyCoeffs& k);

}  // namespace fds
