#include "fds/state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fds {

std::vector<std::string> StateLayout::names() const {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (int k = 0; k < n_seg; ++k) {
    out.push_back("x" + std::to_string(k + 1) + "_h2");
    out.push_back("x" + std::to_string(k + 1));
  }
  out.emplace_back("xsm_h2");
  out.emplace_back("xsm");
  return out;
}

InputVector InputVector::clamped() const {
  return {std::clamp(u_bl, 0.0, 1.0), std::clamp(u_ht, 0.0, 1.0)};
}

CurrentSplit CurrentSplit::proportional(double total, const std::vector<double>& proportions) {
  CurrentSplit s;
  s.total = total;
  s.per_segment.reserve(proportions.size());
  for (double t : proportions) s.per_segment.push_back(t * total);
  return s;
}

void CurrentSplit::validate(int n_seg) const {
  if (static_cast<int>(per_segment.size()) != n_seg) {
    throw DomainError("current split has " + std::to_string(per_segment.size()) +
                      " entries, expected " + std::to_string(n_seg));
  }
  if (!std::isfinite(total) || total < 0.0) throw DomainError("stack current must be >= 0");
  double sum = 0.0;
  for (double i : per_segment) {
    if (!std::isfinite(i) || i < 0.0) throw DomainError("segment current must be >= 0");
    sum += i;
  }
  if (std::abs(sum - total) > 1e-9 * std::max(1.0, total)) {
    throw DomainError("segment currents do not sum to the stack current");
  }
}

bool state_feasible(const Vec& x, const StateLayout& layout) {
  if (x.size() != layout.size()) return false;
  for (int i = 0; i < layout.size(); i += 2) {
    if (!(x[i] >= 0.0) || !(x[i + 1] >= x[i])) return false;
  }
  return true;
}

bool project_feasible(Vec& x, const StateLayout& layout) {
  bool changed = false;
  for (int i = 0; i < layout.size(); i += 2) {
    const double clipped = std::clamp(x[i], 0.0, std::max(x[i + 1], 0.0));
    if (clipped != x[i]) {
      x[i] = clipped;
      changed = true;
    }
  }
  return changed;
}

}  // namespace fds
