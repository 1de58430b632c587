#include "fds/controller.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>

namespace fds {

void ControllerGains::validate(int n_seg) const {
  if (!(beta1 > 0.0) || !(beta2 > 0.0)) throw ConfigError("beta1 and beta2 must be > 0");
  if (q < 1 || q > n_seg) throw ConfigError("q must lie in [1, n_seg]");
  if (!(completion > 0.0)) throw ConfigError("completion must be > 0");
  if (!std::isfinite(k_n1) || !std::isfinite(k_sm1)) throw ConfigError("damping gains must be finite");
  energy.validate();
}

DesiredTrajectory solve_desired(double x_nd, double x_smd, const CurrentSplit& split,
                                const StackParams& p, const Vec* guess) {
  const StateLayout L{p.n_seg};
  if (!(x_smd > x_nd) || !(x_nd > p.p_atm)) {
    throw DomainError("setpoints must satisfy xsm_d > xn_d > p_atm");
  }
  // Unknowns: every state except the two outputs, then u_bl, u_ht.
  std::vector<int> free_idx;
  for (int i = 0; i < L.size(); ++i) {
    if (i != L.total(L.last()) && i != L.sm()) free_idx.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(free_idx.size()) + 2;

  Vec x(L.size());
  if (guess != nullptr && guess->size() == L.size()) {
    x = *guess;
  } else {
    for (int k = 0; k < p.n_seg; ++k) {
      const double s = static_cast<double>(k + 1) / p.n_seg;
      x[L.total(k)] = x_smd + s * (x_nd - x_smd);
      x[L.h2(k)] = 0.95 * x[L.total(k)];
    }
    x[L.sm_h2()] = 0.97 * x_smd;
  }
  x[L.total(L.last())] = x_nd;
  x[L.sm()] = x_smd;

  Vec z(m);
  for (std::size_t i = 0; i < free_idx.size(); ++i) z[static_cast<Eigen::Index>(i)] = x[free_idx[i]];
  z[m - 2] = 0.1;
  z[m - 1] = 0.1;
  auto unpack = [&](const Vec& zz, Vec& xx, InputVector& uu) {
    xx = x;
    for (std::size_t i = 0; i < free_idx.size(); ++i) xx[free_idx[i]] = zz[static_cast<Eigen::Index>(i)];
    uu = {zz[m - 2], zz[m - 1]};
  };
  auto residual = [&](const Vec& zz) {
    Vec xx;
    InputVector uu;
    unpack(zz, xx, uu);
    return Vec(dynamics(xx, uu, split, p));
  };

  bool converged = false;
  for (int it = 0; it < 100 && !converged; ++it) {
    const Vec f = residual(z);
    Mat jac(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double h = j >= m - 2 ? 1e-7 : 1e-6 * std::max(1.0, std::abs(z[j]));
      Vec zp = z, zm = z;
      zp[j] += h;
      zm[j] -= h;
      jac.col(j) = (residual(zp) - residual(zm)) / (2.0 * h);
    }
    const Vec step = jac.fullPivLu().solve(-f);
    // Keep pressures positive while far from the root.
    double scale = 1.0;
    for (std::size_t i = 0; i < free_idx.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (z[ii] + scale * step[ii] <= 0.0) scale = 0.5 * z[ii] / std::abs(step[ii]);
    }
    z += scale * step;
    if (!z.allFinite()) break;
    converged = scale == 1.0 && step.head(m - 2).cwiseAbs().maxCoeff() < 1e-9 * x_smd &&
                step.tail(2).cwiseAbs().maxCoeff() < 1e-12;
  }
  if (!converged) throw DomainError("no equilibrium found for the requested setpoints");

  DesiredTrajectory t;
  unpack(z, t.x_d, t.u_d);
  if (!(t.u_d.u_bl >= 0.0 && t.u_d.u_bl <= 1.0 && t.u_d.u_ht >= 0.0 && t.u_d.u_ht <= 1.0)) {
    throw DomainError("setpoints need inputs outside [0, 1] (u_bl = " + std::to_string(t.u_d.u_bl) +
                      ", u_ht = " + std::to_string(t.u_d.u_ht) + ")");
  }
  if (!state_feasible(t.x_d, L)) throw DomainError("equilibrium has a partial pressure above its total");
  t.x_nd = x_nd;
  t.x_smd = x_smd;
  t.x_nd_h2 = t.x_d[L.h2(L.last())];
  t.split = split;
  t.aux_d = aux_coefficients(t.x_d, split, p);
  t.zeta_d = t.aux_d.zeta;
  return t;
}

double phi(double x, double xd, double beta1, double beta2) {
  return 0.5 * beta1 * x * x - beta2 * xd * (x - xd);
}

double phi_grad(double x, double xd, double beta1, double beta2) { return beta1 * x - beta2 * xd; }

namespace {

double b_of(const Vec& x, double a11, double a17, const StateLayout& L) {
  return a17 * x[L.h2(0)] + a11 * x[L.sm_h2()];
}

double c_of(const Vec& x, double a31, double a33, int q0, const StateLayout& L) {
  return a31 * x[L.h2(q0)] + a33 * x[L.h2(q0 - 1)];
}

}  // namespace

double f1(const Vec& x_d, const AuxCoeffs& a, const Vec& zeta_d, const EnergyCoeffs& k) {
  const StateLayout L{a.n_seg};
  const double a11 = a.a11(), a17 = a.a17();
  if (a11 == 0.0 || a17 == 0.0) throw DomainError("f1 needs a11, a17 != 0");
  const double b = b_of(x_d, a11, a17, L);
  if (!(b > 0.0)) throw DomainError("f1: log argument b(x_d) <= 0");
  return -zeta_d[L.h2(0)] * (1.0 + std::log(b)) / (a11 * a17) - x_d[L.sm_h2()] * k.k_sm_h2 / a11;
}

double f2(const Vec& x_d, const AuxCoeffs& a, const Vec& zeta_d, const EnergyCoeffs& k, int q) {
  const StateLayout L{a.n_seg};
  const int q0 = q - 1;
  if (q0 < 1 || q0 >= a.n_seg) throw DomainError("f2 needs 2 <= q <= n_seg");
  const double a31 = a.a31(q0), a33 = a.a33(q0);
  if (a31 == 0.0 || a33 == 0.0) throw DomainError("f2 needs a31, a33 != 0");
  const double c = c_of(x_d, a31, a33, q0, L);
  if (!(c > 0.0)) throw DomainError("f2: log argument c(x_d) <= 0");
  return zeta_d[L.h2(q0)] * (1.0 + std::log(c)) / (a31 * a33) + x_d[L.h2(q0)] * k.k_j_h2 / a31;
}

double EnergyShaping::b(const Vec& x) const { return b_of(x, a11, a17, StateLayout{n_seg}); }
double EnergyShaping::c(const Vec& x) const {
  return use_c ? c_of(x, a31, a33, q0, StateLayout{n_seg}) : 1.0;
}

namespace {

// Log and phi parts of the shaped energy, without the completion terms.
double core_energy(const EnergyShaping& s, const Vec& x) {
  const StateLayout L{s.n_seg};
  const double b = s.b(x);
  if (!(b > 0.0)) throw SingularityError("shaped energy: log argument b <= 0");
  const double bbar = s.a17 * x[L.h2(0)] - s.a11 * x[L.sm_h2()];
  double h = s.kappa1 * b * std::log(b) - s.f1 * bbar;
  if (s.use_c) {
    const double c = s.c(x);
    if (!(c > 0.0)) throw SingularityError("shaped energy: log argument c <= 0");
    const double cbar = s.a31 * x[L.h2(s.q0)] - s.a33 * x[L.h2(s.q0 - 1)];
    h += s.kappa2 * c * std::log(c) - s.f2 * cbar;
  }
  h += phi(x[L.h2(L.last())], s.x_nd_h2, s.beta1, s.beta2);
  return h;
}

Vec core_grad(const EnergyShaping& s, const Vec& x) {
  const StateLayout L{s.n_seg};
  Vec g = Vec::Zero(L.size());
  const double b = s.b(x);
  if (!(b > 0.0)) throw SingularityError("shaped energy: log argument b <= 0");
  const double lb = s.kappa1 * (1.0 + std::log(b));
  g[L.h2(0)] += lb * s.a17 - s.f1 * s.a17;
  g[L.sm_h2()] += lb * s.a11 + s.f1 * s.a11;
  if (s.use_c) {
    const double c = s.c(x);
    if (!(c > 0.0)) throw SingularityError("shaped energy: log argument c <= 0");
    const double lc = s.kappa2 * (1.0 + std::log(c));
    g[L.h2(s.q0)] += lc * s.a31 - s.f2 * s.a31;
    g[L.h2(s.q0 - 1)] += lc * s.a33 + s.f2 * s.a33;
  }
  g[L.h2(L.last())] += phi_grad(x[L.h2(L.last())], s.x_nd_h2, s.beta1, s.beta2);
  return g;
}

}  // namespace

double EnergyShaping::energy(const Vec& x) const {
  double h = core_energy(*this, x);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!free_coord[static_cast<std::size_t>(j)]) continue;
    const double d = x[j] - x_d[j];
    h += 0.5 * gamma * d * d + slope[j] * d;
  }
  return h;
}

Vec EnergyShaping::grad(const Vec& x) const {
  Vec g = core_grad(*this, x);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!free_coord[static_cast<std::size_t>(j)]) continue;
    g[j] += gamma * (x[j] - x_d[j]) + slope[j];
  }
  return g;
}

EnergyShaping make_shaping(const DesiredTrajectory& t, const ControllerGains& gains) {
  const AuxCoeffs& a = t.aux_d;
  const StateLayout L{a.n_seg};
  EnergyShaping s;
  s.n_seg = a.n_seg;
  s.q0 = gains.q - 1;
  s.use_c = s.q0 >= 1 && s.q0 <= a.n_seg - 2;
  s.a11 = a.a11();
  s.a17 = a.a17();
  s.kappa1 = t.zeta_d[L.h2(0)] / (s.a11 * s.a17);
  s.f1 = f1(t.x_d, a, t.zeta_d, gains.energy);
  if (s.use_c) {
    s.a31 = a.a31(s.q0);
    s.a33 = a.a33(s.q0);
    s.kappa2 = t.zeta_d[L.h2(s.q0)] / (s.a31 * s.a33);
    s.f2 = f2(t.x_d, a, t.zeta_d, gains.energy, gains.q);
  }
  s.beta1 = gains.beta1;
  s.beta2 = gains.beta2;
  s.gamma = gains.completion;
  s.x_nd_h2 = t.x_nd_h2;
  s.x_d = t.x_d;
  s.k = gains.energy;

  // The log terms fix the manifold H2 and segment-q H2 components, phi fixes
  // the outlet H2 component; every other coordinate gets a quadratic pinning
  // its gradient to -k x_d at the target.
  s.free_coord.assign(static_cast<std::size_t>(L.size()), true);
  s.free_coord[static_cast<std::size_t>(L.sm_h2())] = false;
  s.free_coord[static_cast<std::size_t>(L.h2(L.last()))] = false;
  if (s.use_c) s.free_coord[static_cast<std::size_t>(L.h2(s.q0))] = false;
  s.slope = Vec::Zero(L.size());
  const Vec core = core_grad(s, t.x_d);
  const Vec w = gains.energy.weights(L);
  for (int j = 0; j < L.size(); ++j) {
    if (s.free_coord[static_cast<std::size_t>(j)]) s.slope[j] = -w[j] * t.x_d[j] - core[j];
  }
  return s;
}

int GuardFlags::bits() const {
  return (sm_above_first ? 1 : 0) | (first_segment_positive ? 2 : 0) | (q_ordering ? 4 : 0) |
         (outlet_condition ? 8 : 0) | (h2_above_target ? 16 : 0) | (log_b_positive ? 32 : 0) |
         (log_c_positive ? 64 : 0);
}

GuardFlags singularity_guard(const Vec& x, const DesiredTrajectory& t, const EnergyShaping& sh,
                             const StackParams& p) {
  const StateLayout L{p.n_seg};
  const int n = p.n_seg;
  const int q0 = std::clamp(sh.q0, 1, n - 1);
  GuardFlags g;
  g.sm_above_first = x[L.sm()] > x[L.total(0)];
  const double mu1 = p.mu_segment(0);
  const double mu2 = p.mu_segment(std::min(1, n - 1));
  g.first_segment_positive =
      (mu1 * p.rho(0) + mu1 * p.m_inlet()) * x[L.total(0)] + mu2 * p.m_inlet() * x[L.total(std::min(1, n - 1))] > 0.0;
  g.q_ordering = x[L.total(q0 - 1)] > x[L.total(q0)];
  const double muq = p.mu_segment(q0);
  g.outlet_condition = muq * p.m_inlet() * x[L.total(n - 1)] -
                           (muq * p.m_inlet() + p.rho(q0)) * x[L.total(std::max(n - 2, 0))] > 0.0;
  g.h2_above_target = x[L.h2(n - 1)] - t.x_nd_h2 > 0.0;
  g.log_b_positive = sh.b(x) > 0.0;
  g.log_c_positive = !sh.use_c || sh.c(x) > 0.0;
  return g;
}

Vec assigned_damping_term(const Mat& G, const DesiredTrajectory& t, const ControllerGains& gains) {
  const StateLayout L{static_cast<int>(G.rows() - 2) / 2};
  Vec r = Vec::Zero(G.rows());
  r[L.total(L.last())] = G(L.total(L.last()), 0) * gains.k_n1 * t.x_nd;
  r[L.sm()] = G(L.sm(), 1) * gains.k_sm1 * t.x_smd;
  return r;
}

std::optional<AssignedDamping> assigned_damping(const Vec& x, const Vec& omega, const Mat& G,
                                                const DesiredTrajectory& t,
                                                const ControllerGains& gains) {
  const StateLayout L{static_cast<int>(x.size() - 2) / 2};
  const int rn = L.total(L.last());
  AssignedDamping d;
  const Vec r = assigned_damping_term(G, t, gains);
  const double dn = omega[rn] + gains.energy.k_j * x[rn];
  const double ds = omega[L.sm()] + gains.energy.k_sm * x[L.sm()];
  if (r[rn] != 0.0) {
    if (std::abs(dn) < 1e-12) return std::nullopt;
    d.k66 = -r[rn] / dn;
  }
  if (r[L.sm()] != 0.0) {
    if (std::abs(ds) < 1e-12) return std::nullopt;
    d.k88 = -r[L.sm()] / ds;
  }
  return d;
}

ControlOutput state_feedback_control(const Vec& xs, const Eigen::Vector2d& y,
                                     const DesiredTrajectory& t, const ControllerGains& gains,
                                     const EnergyShaping& sh, const Vec& zeta,
                                     const StackParams& p) {
  ControlOutput out;
  out.guards = singularity_guard(xs, t, sh, p);
  if (!out.guards.usable()) {
    out.fault = true;
    out.fault_reason = "log argument of the shaped energy is not positive";
    return out;
  }
  const AuxCoeffs aux = aux_coefficients(xs, p);
  const Mat G = input_map(xs, p);
  Eigen::JacobiSVD<Mat> svd(G);
  const auto sv = svd.singularValues();
  if (!(sv[1] > 1e-12 * sv[0])) {
    out.fault = true;
    out.fault_reason = "input map is rank deficient";
    return out;
  }
  out.omega = sh.grad(xs);
  out.H_a = sh.energy(xs);
  const Vec gh = grad_hamiltonian(xs, gains.energy);
  // R_a enters only through R_a (Omega + gradH), taken in closed form.
  const PHStructure s = build_structure(aux, gains.energy, G, AssignedDamping{}, sh.q0);
  const Vec v = (s.J_d - s.R) * out.omega + s.J_a * gh + assigned_damping_term(G, t, gains) - zeta;
  const Eigen::Vector2d sigma = G.completeOrthogonalDecomposition().solve(v);
  const Eigen::Vector2d u = sigma - gains.r_ai() * y;
  out.u_raw = {u[0], u[1]};
  out.u = out.u_raw.clamped();
  if (!std::isfinite(u[0]) || !std::isfinite(u[1])) {
    out.fault = true;
    out.fault_reason = "control is not finite";
  }
  return out;
}

double closed_loop_energy(const Vec& x, const EnergyShaping& sh) {
  // The quadratic part is differenced termwise; H itself is ~1e10 near the target.
  const Vec w = sh.k.weights(StateLayout{sh.n_seg});
  const double dh = 0.5 * (w.array() * (x - sh.x_d).array() * (x + sh.x_d).array()).sum();
  return dh + sh.energy(x) - sh.energy(sh.x_d);
}

Vec closed_loop_energy_grad(const Vec& x, const EnergyShaping& sh) {
  return grad_hamiltonian(x, sh.k) + sh.grad(x);
}

}  // namespace fds
