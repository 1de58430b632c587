#include "fds/ph_core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace fds {

void EnergyCoeffs::validate() const {
  if (!(k_j_h2 > 0.0 && k_j > 0.0 && k_sm_h2 > 0.0 && k_sm > 0.0)) {
    throw ConfigError("energy weights must all be > 0");
  }
}

Vec EnergyCoeffs::weights(const StateLayout& L) const {
  Vec w(L.size());
  for (int k = 0; k < L.n_seg; ++k) {
    w[L.h2(k)] = k_j_h2;
    w[L.total(k)] = k_j;
  }
  w[L.sm_h2()] = k_sm_h2;
  w[L.sm()] = k_sm;
  return w;
}

namespace {
StateLayout layout_of(const Vec& x) { return StateLayout{static_cast<int>(x.size() - 2) / 2}; }
}  // namespace

double hamiltonian(const Vec& x, const EnergyCoeffs& k) {
  const Vec w = k.weights(layout_of(x));
  return 0.5 * (w.array() * x.array().square()).sum();
}

Vec grad_hamiltonian(const Vec& x, const EnergyCoeffs& k) {
  return k.weights(layout_of(x)).cwiseProduct(x);
}

Mat coefficient_matrix(const AuxCoeffs& a) {
  const StateLayout L{a.n_seg};
  Mat A = Mat::Zero(L.size(), L.size());
  for (int k = 0; k < a.n_seg; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const int up_h2 = k == 0 ? L.sm_h2() : L.h2(k - 1);
    const int up = k == 0 ? L.sm() : L.total(k - 1);
    A(L.h2(k), L.h2(k)) = a.h2_diag[uk];
    A(L.h2(k), up_h2) = a.h2_upstream[uk];
    A(L.total(k), L.h2(k)) = a.total_h2[uk];
    A(L.total(k), L.total(k)) = a.total_diag[uk];
    A(L.total(k), up) = a.total_prev[uk];
    if (k + 1 < a.n_seg) A(L.total(k), L.total(k + 1)) = a.total_next[uk];
  }
  A(L.sm_h2(), L.sm_h2()) = a.a77;
  A(L.sm(), L.total(0)) = a.a82;
  A(L.sm(), L.sm()) = a.a88;
  return A;
}

Mat output_matrix(const StateLayout& L) {
  Mat C = Mat::Zero(2, L.size());
  C(0, L.total(L.last())) = 1.0;
  C(1, L.sm()) = 1.0;
  return C;
}

PHStructure build_structure(const AuxCoeffs& aux, const EnergyCoeffs& k, const Mat& G,
                            const AssignedDamping& damping, int q) {
  const StateLayout L{aux.n_seg};
  if (q < 0 || q >= aux.n_seg) throw DomainError("segment index q out of range");
  const Vec w = k.weights(L);
  // (J - R) K x = A x  =>  J - R = A K^{-1}.
  const Mat F = coefficient_matrix(aux) * w.cwiseInverse().asDiagonal();
  PHStructure s;
  s.J = 0.5 * (F - F.transpose());
  s.R = -0.5 * (F + F.transpose());

  s.J_a = Mat::Zero(L.size(), L.size());
  const double a76 = 0.5 * aux.h2_upstream[static_cast<std::size_t>(q)];
  const double a87 = 0.5 * aux.total_h2[0];
  const int rn = L.total(L.last());
  s.J_a(rn, L.sm_h2()) = -a76;
  s.J_a(L.sm_h2(), rn) = a76;
  s.J_a(L.sm_h2(), L.sm()) = -a87;
  s.J_a(L.sm(), L.sm_h2()) = a87;

  s.R_a = Mat::Zero(L.size(), L.size());
  s.R_a(rn, rn) = damping.k66;
  s.R_a(L.sm(), L.sm()) = damping.k88;

  s.J_d = s.J + s.J_a;
  s.R_d = s.R + s.R_a;
  s.G = G;
  s.C = output_matrix(L);
  return s;
}

Vec matching_residual(const Vec& omega, const Vec& grad_h, const PHStructure& s,
                      const Vec& zeta, const Eigen::Vector2d& sigma) {
  return (s.J_d - s.R_d) * omega + (s.J_a - s.R_a) * grad_h - s.G * sigma - zeta;
}

double skew_residual(const Mat& m) { return (m + m.transpose()).cwiseAbs().maxCoeff(); }

double min_sym_eigenvalue(const Mat& m) {
  const Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

ConditionReport check_conditions(const Vec& x_d, const std::function<Vec(const Vec&)>& omega_fn,
                                 const EnergyCoeffs& k) {
  const auto n = x_d.size();
  ConditionReport r;
  r.jacobian = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-4 * std::max(1.0, std::abs(x_d[j]));
    Vec xp = x_d, xm = x_d;
    xp[j] += h;
    xm[j] -= h;
    r.jacobian.col(j) = (omega_fn(xp) - omega_fn(xm)) / (2.0 * h);
  }
  const double scale = std::max(1.0, r.jacobian.cwiseAbs().maxCoeff());
  r.integrability = skew_residual(r.jacobian - r.jacobian.transpose()) / 2.0 / scale;
  const Vec gh = grad_hamiltonian(x_d, k);
  r.equilibrium = (omega_fn(x_d) + gh).norm();
  r.equilibrium_rel = gh.norm() > 0.0 ? r.equilibrium / gh.norm() : r.equilibrium;
  const Vec w = k.weights(layout_of(x_d));
  r.min_eig = min_sym_eigenvalue(r.jacobian + Mat(w.asDiagonal()));
  return r;
}

std::vector<SegmentPort> segment_ports(const Vec& x, const InputVector& u,
                                       const CurrentSplit& split, const StackParams& p,
                                       const EnergyCoeffs& k) {
  const StateLayout L{p.n_seg};
  const int last = L.last();
  const double blower = u.u_bl * blower_capacity(x, p);
  const double frac_n = x[L.h2(last)] / x[L.total(last)];
  std::vector<SegmentPort> ports;
  ports.reserve(static_cast<std::size_t>(p.n_seg + 1));
  const Vec xdot = dynamics(x, u, split, p);
  for (int i = 0; i < p.n_seg; ++i) {
    const int up = i == 0 ? L.sm() : L.total(i - 1);
    const int up_h2 = i == 0 ? L.sm_h2() : L.h2(i - 1);
    const double area_up = p.area_inlet;
    double in_h2 = orifice_flow(x[up], x[L.total(i)], x[up_h2], x[up], area_up, p.molar_mass_mix, p.alpha);
    double in = orifice_flow(x[up], x[L.total(i)], x[up], x[up], area_up, p.molar_mass_mix, p.alpha);
    double out_h2, out;
    if (i < last) {
      out_h2 = orifice_flow(x[L.total(i)], x[L.total(i + 1)], x[L.h2(i)], x[L.total(i)],
                            p.area_inlet, p.molar_mass_mix, p.alpha);
      out = orifice_flow(x[L.total(i)], x[L.total(i + 1)], x[L.total(i)], x[L.total(i)],
                         p.area_inlet, p.molar_mass_mix, p.alpha);
    } else {
      out_h2 = orifice_flow(x[L.total(i)], p.p_atm, x[L.h2(i)], x[L.total(i)], p.area_bleed,
                            p.molar_mass_mix, p.alpha) + blower * frac_n;
      out = orifice_flow(x[L.total(i)], p.p_atm, x[L.total(i)], x[L.total(i)], p.area_bleed,
                         p.molar_mass_mix, p.alpha) + blower;
    }
    const double mu = p.mu_segment(i);
    const double yh = k.k_j_h2 * x[L.h2(i)];
    const double y = k.k_j * x[L.total(i)];
    SegmentPort s;
    s.energy = 0.5 * k.k_j_h2 * x[L.h2(i)] * x[L.h2(i)] + 0.5 * k.k_j * x[L.total(i)] * x[L.total(i)];
    s.energy_rate = yh * xdot[L.h2(i)] + y * xdot[L.total(i)];
    s.supply = mu * (in_h2 - out_h2) * yh + mu * (in - out) * y;
    ports.push_back(s);
  }
  SegmentPort sm;
  const double yh = k.k_sm_h2 * x[L.sm_h2()];
  const double y = k.k_sm * x[L.sm()];
  sm.energy = 0.5 * yh * x[L.sm_h2()] + 0.5 * y * x[L.sm()];
  sm.energy_rate = yh * xdot[L.sm_h2()] + y * xdot[L.sm()];
  sm.supply = sm.energy_rate;  // every manifold flow crosses its boundary
  ports.push_back(sm);
  return ports;
}

}  // namespace fds
