#pragma once

#include "fds/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace fds {

// Feasible random state: totals decrease from the manifold to the outlet and
// stay above atmosphere, hydrogen partials are 50-98 % of each total.
Vec random_feasible_state(std::mt19937_64& rng, const StackParams& p);
// Random state within `spread` Pa of `center` on every coordinate, clipped to
// feasibility.
Vec random_state_near(std::mt19937_64& rng, const Vec& center, double spread, const StackParams& p);

struct CheckResult {
  std::string name;
  bool pass = true;
  double value = 0.0;
  double tolerance = 0.0;
  bool gating = true;  // informational checks never fail the run
  std::string detail;
};

struct VerifyOptions {
  int structure_samples = 1000;
  int factorization_samples = 100;
  int gradient_samples = 50;
  std::uint64_t seed = 1;
  double skew_tol = 1e-12;       // relative to max(1, |J|_inf)
  double psd_tol = 1e-9;         // relative to |R_d|
  double factorization_tol = 1e-9;
  double gradient_tol = 1e-6;
  double condition_tol = 1e-6;
  double ordering_fraction = 0.99;
  bool inject_sign_error = false;  // flips one J_d entry (negative test hook)
};

// Structure, factorization, gradient and closed-loop condition checks on a
// seeded batch of states and at every target of the scenario.
std::vector<CheckResult> verify_structure(const Scenario& s, const VerifyOptions& opt);

bool all_pass(const std::vector<CheckResult>& checks);
void print_checks(const std::vector<CheckResult>& checks, std::ostream& os);

}  // namespace fds
