#pragma once

// Maximum-entropy completion of a partially specified LEG distribution by
// iterative proportional fitting.
//
// Each constraint fixes Pr(all variables in key occur). IPF starts from the
// uniform distribution over the allowed support and cycles through the
// constraints, rescaling the two cells {atoms ⊇ key} and {the rest} to their
// target masses. For this constraint family the fixed point is the
// entropy maximizer (equivalently the minimum-information distribution
// relative to uniform).

#include <span>
#include <vector>

#include "gbi/dist.hpp"

namespace gbi {

struct ConjunctionConstraint {
  VarMask key = 0;
  double value = 0.0;
};

struct IpfOptions {
  double tolerance = 1e-10;
  int max_sweeps = 10000;
};

struct MaxEntResult {
  std::vector<double> atoms;
  int sweeps = 0;
  double max_error = 0.0;
  bool converged = false;
};

// `support[a]` false pins atom a to zero. The support must admit a
// distribution meeting every constraint with all support atoms positive;
// otherwise IPF converges only sublinearly towards the boundary.
MaxEntResult max_entropy(int var_count, std::span<const ConjunctionConstraint> constraints,
                         const std::vector<bool>& support, const IpfOptions& options = {});

}  // namespace gbi
