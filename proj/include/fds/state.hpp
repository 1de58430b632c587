#pragma once

#include "fds/types.hpp"

#include <string>
#include <vector>

namespace fds {

// Layout of the pressure state for n segments:
//   [x1_h2, x1, ..., xn_h2, xn, xsm_h2, xsm]   (Pa)
// Segment indices here are 0-based.
struct StateLayout {
  int n_seg = 3;

  int size() const { return 2 * n_seg + 2; }
  int h2(int k) const { return 2 * k; }
  int total(int k) const { return 2 * k + 1; }
  int sm_h2() const { return 2 * n_seg; }
  int sm() const { return 2 * n_seg + 1; }
  int last() const { return n_seg - 1; }

  // Column names such as "x1_h2", "x1", "xsm_h2", "xsm".
  std::vector<std::string> names() const;
};

struct InputVector {
  double u_bl = 0.0;
  double u_ht = 0.0;

  InputVector clamped() const;
  Eigen::Vector2d vec() const { return {u_bl, u_ht}; }
};

struct CurrentSplit {
  double total = 0.0;
  std::vector<double> per_segment;

  // I_k = t_k * I.
  static CurrentSplit proportional(double total, const std::vector<double>& proportions);
  // Throws DomainError when the split is inconsistent.
  void validate(int n_seg) const;
};

// True if every total pressure is >= its hydrogen partial >= 0.
bool state_feasible(const Vec& x, const StateLayout& layout);
// Clips partials into [0, total] (totals kept). Returns true if anything changed.
bool project_feasible(Vec& x, const StateLayout& layout);

}  // namespace fds
