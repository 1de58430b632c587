#include "fds/integrate.hpp"

#include <sstream>

namespace fds {

Scheme parse_scheme(const std::string& name) {
  if (name == "rk4") return Scheme::rk4;
  if (name == "euler") return Scheme::euler;
  throw ConfigError("unknown integrator '" + name + "' (expected rk4 or euler)");
}

std::string scheme_name(Scheme s) { return s == Scheme::rk4 ? "rk4" : "euler"; }

namespace {

const Vec& checked(const Vec& d, const Vec& x) {
  if (!d.allFinite()) {
    std::ostringstream os;
    os << "non-finite derivative at state [" << x.transpose() << "]";
    throw IntegrationFault(os.str());
  }
  return d;
}

}  // namespace

Vec integrate_step(const Vec& x, const std::function<Vec(const Vec&)>& f, double dt, Scheme scheme) {
  if (!(dt > 0.0)) throw DomainError("dt must be > 0");
  if (scheme == Scheme::euler) return x + dt * checked(f(x), x);
  const Vec k1 = checked(f(x), x);
  const Vec x2 = x + 0.5 * dt * k1;
  const Vec k2 = checked(f(x2), x2);
  const Vec x3 = x + 0.5 * dt * k2;
  const Vec k3 = checked(f(x3), x3);
  const Vec x4 = x + dt * k3;
  const Vec k4 = checked(f(x4), x4);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace fds
