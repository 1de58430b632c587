#include "fds/observer.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <random>

namespace fds {

void ObserverConfig::validate() const {
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0)) throw ConfigError("observer alphas must be > 0");
  if (!(lipschitz_n > 0.0) || !(lipschitz_sm > 0.0)) throw ConfigError("differentiator bounds must be > 0");
  if (!(condition_cap > 1.0)) throw ConfigError("condition_cap must be > 1");
  if (gain_interval < 1) throw ConfigError("gain_interval must be >= 1");
}

ObserverState make_observer(const Vec& x_hat0, const ObserverConfig& cfg) {
  ObserverState s;
  s.x_hat = x_hat0;
  s.alpha1 = cfg.alpha1;
  s.alpha2 = cfg.alpha2;
  s.l_ob = Mat::Zero(x_hat0.size(), 2);
  return s;
}

namespace {

// Stacked output derivatives with coefficient type S (double or complex).
template <class S>
std::vector<S> lie_derivatives(const std::vector<S>& x, const InputVector& u,
                               const CurrentSplit& split, const StackParams& p, int order) {
  const StateLayout L{p.n_seg};
  using T = Taylor<3, S>;
  std::vector<T> xs(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xs[i].c[0] = x[i];
  const double pc_n2 = cathode_n2_pressure(split.total, p);
  std::vector<T> dx;
  // Coefficient k of f along the flow depends only on coefficients 0..k of x.
  for (int k = 0; k < order; ++k) {
    detail::plant_rates(xs, u.u_bl, u.u_ht, split.per_segment, pc_n2, p, dx);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i].c[k + 1] = dx[i].c[k] / static_cast<double>(k + 1);
  }
  std::vector<S> out(static_cast<std::size_t>(2 * (order + 1)));
  const auto rn = static_cast<std::size_t>(L.total(L.last()));
  const auto rs = static_cast<std::size_t>(L.sm());
  double fact = 1.0;
  for (int j = 0; j <= order; ++j) {
    if (j > 0) fact *= j;
    out[static_cast<std::size_t>(2 * j)] = fact * xs[rn].c[j];
    out[static_cast<std::size_t>(2 * j + 1)] = fact * xs[rs].c[j];
  }
  return out;
}

}  // namespace

Vec output_derivatives(const Vec& x, const InputVector& u, const CurrentSplit& split,
                       const StackParams& p, int order) {
  if (order < 0 || order > 3) throw DomainError("derivative order must lie in [0, 3]");
  (void)dynamics(x, u, split, p);  // validates the state and the split
  const std::vector<double> out =
      lie_derivatives(std::vector<double>(x.data(), x.data() + x.size()), u, split, p, order);
  return Eigen::Map<const Vec>(out.data(), static_cast<Eigen::Index>(out.size()));
}

ObserverGainReport observer_gain(const Vec& x_hat, const InputVector& u, const CurrentSplit& split,
                                 const StackParams& p, double condition_cap) {
  ObserverGainReport r;
  const auto n = x_hat.size();
  (void)dynamics(x_hat, u, split, p);
  r.jacobian_stack = Mat::Zero(8, n);
  // Complex-step columns: the H2 partials reach the outputs through couplings
  // ~1e-12 of the derivative magnitudes, below what differencing resolves.
  using C = std::complex<double>;
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<C> xc(x_hat.data(), x_hat.data() + n);
    const double h = 1e-20 * std::max(1.0, std::abs(x_hat[j]));
    xc[static_cast<std::size_t>(j)] += C(0.0, h);
    const std::vector<C> d = lie_derivatives(xc, u, split, p, 3);
    for (int i = 0; i < 8; ++i) r.jacobian_stack(i, j) = d[static_cast<std::size_t>(i)].imag() / h;
  }
  // Rows span several decades (one per derivative order), so the stack is
  // equilibrated before inverting; the condition number is that of the scaled stack.
  const Mat& J = r.jacobian_stack;
  Vec dr = Vec::Ones(J.rows()), dc = Vec::Ones(n);
  for (int it = 0; it < 20; ++it) {
    const Mat s1 = dr.asDiagonal() * J * dc.asDiagonal();
    for (Eigen::Index i = 0; i < J.rows(); ++i) {
      const double m = s1.row(i).cwiseAbs().maxCoeff();
      if (m > 0.0 && std::isfinite(m)) dr[i] /= std::sqrt(m);
    }
    const Mat s2 = dr.asDiagonal() * J * dc.asDiagonal();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double m = s2.col(j).cwiseAbs().maxCoeff();
      if (m > 0.0 && std::isfinite(m)) dc[j] /= std::sqrt(m);
    }
  }
  const Mat scaled = dr.asDiagonal() * J * dc.asDiagonal();
  Eigen::JacobiSVD<Mat> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smin = sv[sv.size() - 1];
  r.condition_number = smin > 0.0 ? sv[0] / smin : std::numeric_limits<double>::infinity();
  r.ok = std::isfinite(r.condition_number) && r.condition_number <= condition_cap;
  if (!r.ok) return r;
  const Mat inv = dc.asDiagonal() * svd.matrixV() * sv.cwiseInverse().asDiagonal() *
                  svd.matrixU().transpose() * dr.asDiagonal();
  r.l_ob = inv.rightCols(2);
  return r;
}

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double sliding_correction(double alpha, double e0, double e1, double e2, double e3) {
  const double a0 = std::abs(e0);
  const double inner = e1 + 0.5 * std::pow(a0, 0.75) * sgn(e0);
  const double mid = e2 + std::pow(std::pow(e1, 4) + a0 * a0 * a0, 1.0 / 6.0) * sgn(inner);
  const double outer =
      3.0 * std::pow(std::pow(e2, 6) + std::pow(e1, 4) + a0 * a0 * a0, 1.0 / 12.0) * sgn(mid);
  return -alpha * (e3 + outer);
}

Eigen::Vector2d differentiator_step(const Eigen::Vector2d& y_err, ObserverState& s,
                                    const ObserverConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be > 0");
  Eigen::Vector2d nu;
  for (int i = 0; i < 2; ++i) {
    const double lip = i == 0 ? cfg.lipschitz_n : cfg.lipschitz_sm;
    double& z0 = s.diff(i, 0);
    double& z1 = s.diff(i, 1);
    double& z2 = s.diff(i, 2);
    double& z3 = s.diff(i, 3);
    const double s0 = z0 - y_err[i];
    const double v0 = -3.0 * std::pow(lip, 0.25) * std::pow(std::abs(s0), 0.75) * sgn(s0) + z1;
    const double s1 = z1 - v0;
    const double v1 = -2.0 * std::pow(lip, 1.0 / 3.0) * std::pow(std::abs(s1), 2.0 / 3.0) * sgn(s1) + z2;
    const double s2 = z2 - v1;
    const double v2 = -1.5 * std::sqrt(lip) * std::sqrt(std::abs(s2)) * sgn(s2) + z3;
    const double v3 = -1.1 * lip * sgn(z3 - v2);
    z0 += dt * v0;
    z1 += dt * v1;
    z2 += dt * v2;
    z3 += dt * v3;
    const double alpha = i == 0 ? s.alpha1 : s.alpha2;
    nu[i] = sliding_correction(alpha, z0, z1, z2, z3);
  }
  s.nu = nu;
  return nu;
}

void observer_step(ObserverState& s, const InputVector& u, const Eigen::Vector2d& y,
                   const CurrentSplit& split, const StackParams& p, const ObserverConfig& cfg,
                   double dt, Scheme scheme) {
  const StateLayout L{p.n_seg};
  if (s.steps_since_gain == 0 || s.steps_since_gain >= cfg.gain_interval) {
    const ObserverGainReport g = observer_gain(s.x_hat, u, split, p, cfg.condition_cap);
    s.condition = g.condition_number;
    s.gain_fault = !g.ok;
    if (g.ok) {
      s.l_ob = g.l_ob;
      s.gain_valid = true;
    }
    s.steps_since_gain = 0;
  }
  ++s.steps_since_gain;
  const Eigen::Vector2d y_hat(s.x_hat[L.total(L.last())], s.x_hat[L.sm()]);
  const Eigen::Vector2d nu = differentiator_step(y_hat - y, s, cfg, dt);
  const Vec inject = s.l_ob * nu;
  auto f = [&](const Vec& xh) { return Vec(dynamics(xh, u, split, p) + inject); };
  s.x_hat = integrate_step(s.x_hat, f, dt, scheme);
  s.projected = project_feasible(s.x_hat, L);
}

ControlOutput output_feedback_control(const ObserverState& s, const Eigen::Vector2d& y,
                                      const DesiredTrajectory& traj, const ControllerGains& gains,
                                      const EnergyShaping& sh, const StackParams& p) {
  const Vec zeta = disturbance(s.x_hat, traj.split, p);
  return state_feedback_control(s.x_hat, y, traj, gains, sh, zeta, p);
}

LipschitzReport lipschitz_probe(const StackParams& p, const Vec& lo, const Vec& hi, int samples,
                                std::uint64_t seed, const EnergyShaping* sh) {
  const StateLayout L{p.n_seg};
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    Vec x(L.size());
    for (int i = 0; i < L.size(); ++i) {
      std::uniform_real_distribution<double> d(lo[i], hi[i]);
      x[i] = d(rng);
    }
    project_feasible(x, L);
    return x;
  };
  const EnergyCoeffs k = sh != nullptr ? sh->k : EnergyCoeffs{};
  const int q0 = sh != nullptr ? sh->q0 : std::min(1, p.n_seg - 1);
  auto terms = [&](const Vec& x) {
    const AuxCoeffs a = aux_coefficients(x, p);
    const PHStructure s = build_structure(a, k, input_map(x, p), AssignedDamping{}, q0);
    const Vec gh = grad_hamiltonian(x, k);
    Mat out(L.size(), 3);
    out.col(0) = (s.J - s.R) * gh;
    out.col(1) = (s.J_a - s.R_a) * gh;
    out.col(2) = sh != nullptr ? Vec((s.J_d - s.R_d) * sh->grad(x)) : Vec::Zero(L.size());
    return out;
  };
  LipschitzReport r;
  for (int i = 0; i < samples; ++i) {
    const Vec x = draw();
    const Vec xp = draw();
    const double dx = (x - xp).norm();
    if (dx == 0.0) continue;
    Mat a, b;
    try {
      a = terms(x);
      b = terms(xp);
    } catch (const SingularityError&) {
      continue;
    }
    const Mat d = a - b;
    r.rho1 = std::max(r.rho1, d.col(0).norm() / dx);
    r.delta_a = std::max(r.delta_a, d.col(1).norm() / dx);
    r.delta_d = std::max(r.delta_d, d.col(2).norm() / dx);
    ++r.samples;
  }
  return r;
}

}  // namespace fds
