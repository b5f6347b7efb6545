#include "gbi/dist.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "gbi/error.hpp"
#include "gbi/kernels.hpp"

namespace gbi {
namespace {

int checked_var_count(std::size_t size, int max_vars) {
  if (size == 0 || !std::has_single_bit(size)) {
    throw Error(ErrorCode::InvalidDistribution,
                "table size " + std::to_string(size) + " is not a power of two");
  }
  const int m = std::countr_zero(size);
  if (m > max_vars || m > kHardMaxVars) {
    throw Error(ErrorCode::InvalidDistribution,
                "table over " + std::to_string(m) + " variables exceeds the cap of " +
                    std::to_string(std::min(max_vars, kHardMaxVars)));
  }
  return m;
}

void check_subset(int var_count, VarMask subset) {
  if ((subset & ~full_mask(var_count)) != 0) {
    throw Error(ErrorCode::UnknownVariable,
                "variable subset refers to a position beyond " + std::to_string(var_count));
  }
}

void normalize_in_place(std::vector<double>& a) {
  const auto& k = kernels::active();
  const double total = k.sum(a.data(), a.size());
  k.scale(a.data(), a.size(), 1.0 / total);
}

}  // namespace

Cmd::Cmd(std::vector<double> atoms, int max_vars)
    : var_count_(checked_var_count(atoms.size(), max_vars)), atoms_(std::move(atoms)) {
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!(atoms_[i] >= 0.0) || !std::isfinite(atoms_[i])) {
      throw Error(ErrorCode::InvalidDistribution,
                  "atom " + std::to_string(i) + " is negative or not finite");
    }
  }
  const double total = kernels::active().sum(atoms_.data(), atoms_.size());
  if (std::abs(total - 1.0) > tol::kStructural) {
    throw Error(ErrorCode::InvalidDistribution,
                "atoms sum to " + std::to_string(total) + ", not 1");
  }
  kernels::active().scale(atoms_.data(), atoms_.size(), 1.0 / total);
}

Cmd::Cmd(Trusted, int var_count, std::vector<double> atoms)
    : var_count_(var_count), atoms_(std::move(atoms)) {}

Cmd Cmd::uniform(int var_count) {
  checked_var_count(std::size_t{1} << var_count, kHardMaxVars);
  const std::size_t n = std::size_t{1} << var_count;
  return Cmd(Trusted{}, var_count, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Cmd Cmd::point_mass(int var_count, AtomIndex atom) {
  checked_var_count(std::size_t{1} << var_count, kHardMaxVars);
  std::vector<double> a(std::size_t{1} << var_count, 0.0);
  a.at(atom) = 1.0;
  return Cmd(Trusted{}, var_count, std::move(a));
}

ConjunctionTable::ConjunctionTable(int var_count, std::vector<double> values)
    : var_count_(var_count), values_(std::move(values)) {
  if (var_count < 0 || var_count > kHardMaxVars ||
      values_.size() != (std::size_t{1} << var_count)) {
    throw Error(ErrorCode::InvalidArgument, "conjunction table size does not match var count");
  }
}

double conjunction_prob(const Cmd& cmd, VarMask subset) {
  check_subset(cmd.var_count(), subset);
  const auto atoms = cmd.atoms();
  return kernels::active().pattern_mass(atoms.data(), atoms.size(), subset, subset);
}

double marginal(const Cmd& cmd, int var) {
  if (var < 0 || var >= cmd.var_count()) {
    throw Error(ErrorCode::UnknownVariable, "variable position " + std::to_string(var));
  }
  return conjunction_prob(cmd, VarMask{1} << var);
}

std::vector<std::uint32_t> restriction_index(int var_count, std::span<const int> positions) {
  const std::size_t n = std::size_t{1} << var_count;
  std::vector<std::uint32_t> index(n, 0);
  for (std::size_t j = 0; j < positions.size(); ++j) {
    const int p = positions[j];
    for (std::size_t a = 0; a < n; ++a) {
      index[a] |= static_cast<std::uint32_t>((a >> p) & 1U) << j;
    }
  }
  return index;
}

Cmd marginalize(const Cmd& cmd, std::span<const int> positions) {
  if (positions.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cannot marginalize onto an empty variable set");
  }
  VarMask seen = 0;
  for (int p : positions) {
    if (p < 0 || p >= cmd.var_count()) {
      throw Error(ErrorCode::UnknownVariable, "variable position " + std::to_string(p));
    }
    if (seen & (VarMask{1} << p)) {
      throw Error(ErrorCode::InvalidArgument, "duplicate variable position in marginal");
    }
    seen |= VarMask{1} << p;
  }
  const auto index = restriction_index(cmd.var_count(), positions);
  std::vector<double> out(std::size_t{1} << positions.size(), 0.0);
  const auto atoms = cmd.atoms();
  for (std::size_t a = 0; a < atoms.size(); ++a) out[index[a]] += atoms[a];
  normalize_in_place(out);
  return CmdBuilder::adopt(static_cast<int>(positions.size()), std::move(out));
}

Cmd sum_out(const Cmd& cmd, VarMask keep) {
  check_subset(cmd.var_count(), keep);
  std::vector<int> positions;
  for (int k = 0; k < cmd.var_count(); ++k) {
    if (keep & (VarMask{1} << k)) positions.push_back(k);
  }
  return marginalize(cmd, positions);
}

Cmd condition(const Cmd& cmd, Assignment assignment) {
  check_subset(cmd.var_count(), assignment.vars);
  std::vector<double> a(cmd.atoms().begin(), cmd.atoms().end());
  const auto& k = kernels::active();
  const double kept =
      k.pattern_keep(a.data(), a.size(), assignment.vars, assignment.values & assignment.vars);
  if (kept < tol::kZeroMass) {
    throw Error(ErrorCode::ImpossibleEvidence, "assignment has zero probability");
  }
  k.scale(a.data(), a.size(), 1.0 / kept);
  return CmdBuilder::adopt(cmd.var_count(), std::move(a));
}

ConjunctionTable zeta(const Cmd& cmd) {
  std::vector<double> v(cmd.atoms().begin(), cmd.atoms().end());
  kernels::active().superset_sum(v.data(), cmd.var_count());
  return ConjunctionTable(cmd.var_count(), std::move(v));
}

Cmd moebius(const ConjunctionTable& table) {
  if (std::abs(table[0] - 1.0) > tol::kStructural) {
    throw Error(ErrorCode::InvalidArgument, "conjunction table entry for the empty set must be 1");
  }
  std::vector<double> a(table.values().begin(), table.values().end());
  kernels::active().superset_diff(a.data(), table.var_count());
  bool clamped = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < -tol::kStructural) {
      throw Error(ErrorCode::InfeasibleConstraintSet,
                  "constraint values imply atom " + std::to_string(i) + " = " +
                      std::to_string(a[i]));
    }
    if (a[i] < 0.0) {
      a[i] = 0.0;
      clamped = true;
    }
  }
  if (clamped || std::abs(kernels::active().sum(a.data(), a.size()) - 1.0) > tol::kTransform) {
    normalize_in_place(a);
  }
  return CmdBuilder::adopt(table.var_count(), std::move(a));
}

double entropy(const Cmd& cmd) {
  double h = 0.0;
  for (double p : cmd.atoms()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::InvalidArgument, "tables differ in size");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace gbi
