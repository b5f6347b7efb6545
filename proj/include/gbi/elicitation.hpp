#pragma once

// CMD estimation: canonical constraint sequencing, feasible intervals,
// minimum-information defaults, structural-relation pruning and CMD
// construction for a single LEG.
//
// A constraint key is a nonempty subset S of the LEG's variables; its value is
// Pr(every variable in S occurs). The 2^m - 1 keys together with
// normalization determine an m-variable CMD. Keys are visited in canonical
// order: for the k-th variable, {v_k} ∪ T for every subset T of the earlier
// variables, T by increasing bitmask.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gbi/dist.hpp"
#include "gbi/error.hpp"
#include "gbi/legnet.hpp"

namespace gbi {

struct LegShape {
  int var_count = 0;
  std::vector<LocalRelation> relations;
};

LegShape shape_of(const LegNet& net, LegId leg);

enum class ConstraintSource { UserSpecified, Defaulted, ForcedZero, DerivedFromCutoff };
enum class EntryForm { Joint, Conditional };

std::string_view to_string(ConstraintSource s) noexcept;
std::optional<ConstraintSource> parse_constraint_source(std::string_view s) noexcept;

struct ConstraintRecord {
  VarMask key = 0;
  // Always the joint value Pr(∧key).
  double value = 0.0;
  ConstraintSource source = ConstraintSource::UserSpecified;
  EntryForm form = EntryForm::Joint;
  // Conditional entries: Pr(key \ given | given) = conditional_value.
  VarMask given = 0;
  double conditional_value = 0.0;

  bool operator==(const ConstraintRecord&) const = default;
};

// All nonempty subsets of m variables in canonical order.
std::vector<VarMask> canonical_order(int var_count);

// Smallest superset of `key` closed under the cutoff relations.
VarMask cutoff_closure(const LegShape& shape, VarMask key);

bool is_forced_zero_key(const LegShape& shape, VarMask key);
bool is_forced_zero_atom(const LegShape& shape, AtomIndex atom);

// Keys actually asked: canonical order minus forced-zero and cutoff-derived keys.
std::vector<VarMask> canonical_sequence(const LegShape& shape);

std::vector<VarMask> forced_zero_keys(const LegShape& shape);
std::vector<AtomIndex> forced_zero_atoms(const LegShape& shape);
// Keys whose value is that of their cutoff closure.
std::vector<VarMask> cutoff_derived_keys(const LegShape& shape);

// Keys of canonical_sequence with at most `max_order` variables (all when empty).
std::size_t count_required_constraints(const LegShape& shape, std::optional<int> max_order = {});

struct ConditionalEntry {
  VarMask given = 0;
  double probability = 0.0;
};

struct Prompt {
  VarMask key = 0;
  Interval interval;
  double default_value = 0.0;
  // Asked keys not yet visited, including this one.
  std::size_t remaining = 0;
};

// Immutable; every transition returns a new state.
class ElicitationState {
 public:
  explicit ElicitationState(LegShape shape);

  // Replays stored records: asked keys with a record are accepted in order,
  // asked keys without one are skipped. Forced and derived records are
  // checked against the shape and otherwise ignored.
  static ElicitationState replay(LegShape shape, std::span<const ConstraintRecord> records);

  const LegShape& shape() const noexcept { return shape_; }
  int var_count() const noexcept { return shape_.var_count; }
  const std::vector<VarMask>& sequence() const noexcept { return sequence_; }
  std::size_t cursor() const noexcept { return cursor_; }
  bool finished() const noexcept { return cursor_ >= sequence_.size(); }
  std::optional<VarMask> next_key() const;
  std::size_t remaining() const noexcept { return sequence_.size() - cursor_; }

  // User-specified and defaulted records, canonical order.
  const std::vector<ConstraintRecord>& accepted() const noexcept { return accepted_; }
  // Every key in canonical order: accepted, forced-zero, and derived records
  // (derived ones only once their closure has a value).
  std::vector<ConstraintRecord> all_records() const;

  // Value of Pr(∧subset) pinned by accepted records and relations, if any.
  std::optional<double> determined_value(VarMask subset) const;

  // Atoms that some feasible completion gives positive probability.
  std::vector<bool> feasible_support() const;

  Interval feasible_interval(VarMask key) const;
  double min_info_default(VarMask key) const;
  Prompt prompt() const;

  ElicitationState accept(double joint_value,
                          ConstraintSource source = ConstraintSource::UserSpecified) const;
  ElicitationState accept(ConditionalEntry entry) const;
  ElicitationState accept_default() const;
  ElicitationState skip() const;

  // Max-entropy distribution satisfying every accepted constraint.
  std::vector<double> max_entropy_atoms() const;

 private:
  VarMask require_next() const;
  ElicitationState with_record(ConstraintRecord r) const;

  LegShape shape_;
  std::vector<VarMask> sequence_;
  std::vector<bool> structural_support_;
  std::size_t cursor_ = 0;
  std::vector<ConstraintRecord> accepted_;
};

Interval feasible_interval(const ElicitationState& state, VarMask key);
double min_info_default(const ElicitationState& state, VarMask key);
ElicitationState accept_constraint(const ElicitationState& state, VarMask key, double joint_value);
ElicitationState accept_constraint(const ElicitationState& state, VarMask key,
                                   ConditionalEntry entry);

struct DefaultPolicy {
  // Keys of at most this order must be accepted; higher ones may be
  // defaulted. Empty means every key must be accepted.
  std::optional<int> max_specified_order;
};

Cmd build_cmd(const ElicitationState& state, const DefaultPolicy& policy = {});

}  // namespace gbi
