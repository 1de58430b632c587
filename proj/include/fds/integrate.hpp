#pragma once

#include "fds/types.hpp"

#include <functional>
#include <string>

namespace fds {

enum class Scheme { rk4, euler };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);

// One fixed step of classical RK4 or explicit Euler. Throws IntegrationFault
// (with the state in the message) on a non-finite derivative.
Vec integrate_step(const Vec& x, const std::function<Vec(const Vec&)>& f, double dt, Scheme scheme);

}  // namespace fds
