#include "gbi/maxent.hpp"

#include <algorithm>
#include <cmath>

#include "gbi/error.hpp"
#include "gbi/kernels.hpp"

namespace gbi {

MaxEntResult max_entropy(int var_count, std::span<const ConjunctionConstraint> constraints,
                         const std::vector<bool>& support, const IpfOptions& options) {
  const std::size_t n = std::size_t{1} << var_count;
  if (support.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "support mask has the wrong size");
  }
  const auto live = static_cast<double>(std::count(support.begin(), support.end(), true));
  if (live == 0.0) {
    throw Error(ErrorCode::InfeasibleConstraintSet, "no atom may carry probability");
  }

  MaxEntResult r;
  r.atoms.assign(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    if (support[a]) r.atoms[a] = 1.0 / live;
  }

  const auto& k = kernels::active();
  double* p = r.atoms.data();
  auto worst_error = [&] {
    double e = 0.0;
    for (const auto& c : constraints) {
      e = std::max(e, std::abs(k.pattern_mass(p, n, c.key, c.key) - c.value));
    }
    return e;
  };

  r.max_error = worst_error();
  while (r.max_error >= options.tolerance && r.sweeps < options.max_sweeps) {
    for (const auto& c : constraints) {
      const double inside = k.pattern_mass(p, n, c.key, c.key);
      const double outside = 1.0 - inside;
      const double in_factor = inside > 0.0 ? c.value / inside : 1.0;
      const double out_factor = outside > 0.0 ? (1.0 - c.value) / outside : 1.0;
      k.pattern_scale(p, n, c.key, c.key, in_factor, out_factor);
      k.scale(p, n, 1.0 / k.sum(p, n));
    }
    ++r.sweeps;
    r.max_error = worst_error();
  }
  r.converged = r.max_error < options.tolerance;
  return r;
}

}  // namespace gbi
