#pragma once

// Dense joint distributions over the binary variables of one LEG.
//
// Bit k of an atom index is set when the LEG's k-th declared variable occurs,
// so a LEG of m variables has 2^m atoms. Variable subsets local to a LEG are
// carried the same way, as a VarMask.

#include <cstdint>
#include <span>
#include <vector>

namespace gbi {

using VarMask = std::uint32_t;
using AtomIndex = std::uint32_t;

namespace tol {
// Normalization and feasibility slack.
inline constexpr double kStructural = 1e-9;
// Transform round-trip accuracy.
inline constexpr double kTransform = 1e-12;
// Mass below this is treated as zero when dividing.
inline constexpr double kZeroMass = 1e-12;
}  // namespace tol

inline constexpr int kDefaultMaxVars = 12;
// Absolute ceiling for any table; the configurable LEG cap must not exceed it.
inline constexpr int kHardMaxVars = 20;

inline constexpr VarMask full_mask(int var_count) noexcept {
  return var_count >= 32 ? ~VarMask{0} : (VarMask{1} << var_count) - 1;
}

// Occur/not-occur values for the variables in `vars`; bits of `values` outside
// `vars` are ignored.
struct Assignment {
  VarMask vars = 0;
  VarMask values = 0;
};

class Cmd {
 public:
  // Validates: size is a power of two, entries >= 0, sum within 1e-9 of 1.
  // The stored table is renormalized to absorb the residual.
  explicit Cmd(std::vector<double> atoms, int max_vars = kDefaultMaxVars);

  static Cmd uniform(int var_count);
  static Cmd point_mass(int var_count, AtomIndex atom);

  int var_count() const noexcept { return var_count_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  std::span<const double> atoms() const noexcept { return atoms_; }
  double operator[](AtomIndex a) const { return atoms_[a]; }

  bool operator==(const Cmd&) const = default;

 private:
  struct Trusted {};
  Cmd(Trusted, int var_count, std::vector<double> atoms);

  int var_count_;
  std::vector<double> atoms_;

  friend class CmdBuilder;
};

// Unchecked construction path for library code that has already normalized.
class CmdBuilder {
 public:
  static Cmd adopt(int var_count, std::vector<double> atoms) {
    return Cmd(Cmd::Trusted{}, var_count, std::move(atoms));
  }
};

// Entry for subset S is Pr(every variable in S occurs); entry 0 is 1.
class ConjunctionTable {
 public:
  explicit ConjunctionTable(int var_count, std::vector<double> values);

  int var_count() const noexcept { return var_count_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](VarMask s) const { return values_[s]; }

 private:
  int var_count_;
  std::vector<double> values_;
};

// Σ atoms[a] over a ⊇ subset.
double conjunction_prob(const Cmd& cmd, VarMask subset);

// Marginal Pr(variable at bit position `var` occurs).
double marginal(const Cmd& cmd, int var);

// Marginal over the kept variables; bit j of the result is the j-th lowest
// set bit of `keep`.
Cmd sum_out(const Cmd& cmd, VarMask keep);

// Marginal over `positions`; bit j of the result is source bit positions[j].
Cmd marginalize(const Cmd& cmd, std::span<const int> positions);

// Bayes conditioning on a certain assignment.
Cmd condition(const Cmd& cmd, Assignment assignment);

ConjunctionTable zeta(const Cmd& cmd);
Cmd moebius(const ConjunctionTable& table);

// Shannon entropy in nats.
double entropy(const Cmd& cmd);

// Largest |a[i] - b[i]|; tables must have equal size.
double max_abs_diff(std::span<const double> a, std::span<const double> b);

// For each atom of an m-variable table, its index restricted to `positions`
// (bit j of the result is bit positions[j] of the atom).
std::vector<std::uint32_t> restriction_index(int var_count, std::span<const int> positions);

}  // namespace gbi
