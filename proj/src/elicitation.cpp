#include "gbi/elicitation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "gbi/kernels.hpp"
#include "gbi/lp.hpp"
#include "gbi/maxent.hpp"

namespace gbi {
namespace {

constexpr double kSupportThreshold = 1e-11;
constexpr double kPointInterval = 1e-12;

bool has(VarMask set, int pos) { return (set >> pos) & 1U; }

bool contains_forbidden_pair(const LegShape& shape, VarMask set) {
  return std::any_of(shape.relations.begin(), shape.relations.end(), [&](const LocalRelation& r) {
    return r.kind == RelationKind::Forbidden && has(set, r.first) && has(set, r.second);
  });
}

std::string key_text(VarMask key) {
  std::string s = "{";
  bool first = true;
  for (int k = 0; k < 32; ++k) {
    if (!has(key, k)) continue;
    if (!first) s += ",";
    s += "v" + std::to_string(k);
    first = false;
  }
  return s + "}";
}

void check_shape(const LegShape& shape) {
  if (shape.var_count < 1 || shape.var_count > kHardMaxVars) {
    throw Error(ErrorCode::InvalidArgument,
                "LEG variable count " + std::to_string(shape.var_count) + " out of range");
  }
  for (const auto& r : shape.relations) {
    if (r.first < 0 || r.second < 0 || r.first >= shape.var_count ||
        r.second >= shape.var_count || r.first == r.second) {
      throw Error(ErrorCode::InvalidArgument, "relation positions out of range");
    }
  }
}

void check_key(const LegShape& shape, VarMask key) {
  if (key == 0) throw Error(ErrorCode::InvalidArgument, "constraint key must be nonempty");
  if ((key & ~full_mask(shape.var_count)) != 0) {
    throw Error(ErrorCode::UnknownVariable, "constraint key " + key_text(key) + " is not in the LEG");
  }
}

std::vector<double> conjunction_row(const std::vector<AtomIndex>& columns, VarMask key) {
  std::vector<double> row(columns.size(), 0.0);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if ((columns[j] & key) == key) row[j] = 1.0;
  }
  return row;
}

// Linear program over the atoms allowed by `allowed`, constrained by
// normalization and every accepted record.
struct AtomProgram {
  std::vector<AtomIndex> columns;
  lp::Problem problem;

  AtomProgram(const std::vector<bool>& allowed, const std::vector<ConstraintRecord>& accepted) {
    for (AtomIndex a = 0; a < allowed.size(); ++a) {
      if (allowed[a]) columns.push_back(a);
    }
    problem.num_vars = columns.size();
    problem.add_row(std::vector<double>(columns.size(), 1.0), 1.0);
    for (const auto& r : accepted) problem.add_row(conjunction_row(columns, r.key), r.value);
    problem.cost.assign(columns.size(), 0.0);
  }

  lp::Solution optimize(std::vector<double> cost) {
    problem.cost = std::move(cost);
    auto s = lp::solve(problem);
    if (s.status == lp::Status::Infeasible) {
      throw Error(ErrorCode::InfeasibleConstraintSet,
                  "accepted constraints admit no distribution");
    }
    return s;
  }
};

}  // namespace

LegShape shape_of(const LegNet& net, LegId leg) {
  return LegShape{static_cast<int>(net.leg(leg).vars.size()), net.relations_for(leg)};
}

std::string_view to_string(ConstraintSource s) noexcept {
  switch (s) {
    case ConstraintSource::UserSpecified: return "user";
    case ConstraintSource::Defaulted: return "defaulted";
    case ConstraintSource::ForcedZero: return "forced_zero";
    case ConstraintSource::DerivedFromCutoff: return "derived_from_cutoff";
  }
  return "user";
}

std::optional<ConstraintSource> parse_constraint_source(std::string_view s) noexcept {
  if (s == "user") return ConstraintSource::UserSpecified;
  if (s == "defaulted") return ConstraintSource::Defaulted;
  if (s == "forced_zero") return ConstraintSource::ForcedZero;
  if (s == "derived_from_cutoff") return ConstraintSource::DerivedFromCutoff;
  return std::nullopt;
}

std::vector<VarMask> canonical_order(int var_count) {
  std::vector<VarMask> keys;
  keys.reserve(full_mask(var_count));
  for (int k = 0; k < var_count; ++k) {
    const VarMask top = VarMask{1} << k;
    for (VarMask lower = 0; lower < top; ++lower) keys.push_back(top | lower);
  }
  return keys;
}

VarMask cutoff_closure(const LegShape& shape, VarMask key) {
  VarMask closed = key;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& r : shape.relations) {
      if (r.kind == RelationKind::Cutoff && has(closed, r.first) && !has(closed, r.second)) {
        closed |= VarMask{1} << r.second;
        grew = true;
      }
    }
  }
  return closed;
}

bool is_forced_zero_key(const LegShape& shape, VarMask key) {
  return contains_forbidden_pair(shape, cutoff_closure(shape, key));
}

bool is_forced_zero_atom(const LegShape& shape, AtomIndex atom) {
  return contains_forbidden_pair(shape, atom) || cutoff_closure(shape, atom) != atom;
}

std::vector<VarMask> canonical_sequence(const LegShape& shape) {
  check_shape(shape);
  std::vector<VarMask> out;
  for (VarMask key : canonical_order(shape.var_count)) {
    if (!is_forced_zero_key(shape, key) && cutoff_closure(shape, key) == key) out.push_back(key);
  }
  return out;
}

std::vector<VarMask> forced_zero_keys(const LegShape& shape) {
  check_shape(shape);
  std::vector<VarMask> out;
  for (VarMask key : canonical_order(shape.var_count)) {
    if (is_forced_zero_key(shape, key)) out.push_back(key);
  }
  return out;
}

std::vector<AtomIndex> forced_zero_atoms(const LegShape& shape) {
  check_shape(shape);
  std::vector<AtomIndex> out;
  for (AtomIndex a = 0; a <= full_mask(shape.var_count); ++a) {
    if (is_forced_zero_atom(shape, a)) out.push_back(a);
  }
  return out;
}

std::vector<VarMask> cutoff_derived_keys(const LegShape& shape) {
  check_shape(shape);
  std::vector<VarMask> out;
  for (VarMask key : canonical_order(shape.var_count)) {
    if (!is_forced_zero_key(shape, key) && cutoff_closure(shape, key) != key) out.push_back(key);
  }
  return out;
}

std::size_t count_required_constraints(const LegShape& shape, std::optional<int> max_order) {
  const auto seq = canonical_sequence(shape);
  if (!max_order) return seq.size();
  return static_cast<std::size_t>(std::count_if(seq.begin(), seq.end(), [&](VarMask k) {
    return std::popcount(k) <= *max_order;
  }));
}

ElicitationState::ElicitationState(LegShape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  sequence_ = canonical_sequence(shape_);
  structural_support_.assign(std::size_t{1} << shape_.var_count, true);
  for (AtomIndex a : forced_zero_atoms(shape_)) structural_support_[a] = false;
}

ElicitationState ElicitationState::replay(LegShape shape,
                                          std::span<const ConstraintRecord> records) {
  ElicitationState state(std::move(shape));
  for (const auto& r : records) {
    check_key(state.shape_, r.key);
    if (r.source == ConstraintSource::ForcedZero) {
      if (!is_forced_zero_key(state.shape_, r.key) || std::abs(r.value) > tol::kStructural) {
        throw Error(ErrorCode::InvalidArgument,
                    "record " + key_text(r.key) + " is marked forced-zero but is not");
      }
      continue;
    }
    if (r.source == ConstraintSource::DerivedFromCutoff) {
      if (is_forced_zero_key(state.shape_, r.key) ||
          cutoff_closure(state.shape_, r.key) == r.key) {
        throw Error(ErrorCode::InvalidArgument,
                    "record " + key_text(r.key) + " is marked cutoff-derived but is not");
      }
      continue;
    }
    while (!state.finished() && state.sequence_[state.cursor_] != r.key) state = state.skip();
    if (state.finished()) {
      throw Error(ErrorCode::NotNextKey, "record " + key_text(r.key) +
                                             " is out of canonical order or is never asked");
    }
    if (r.form == EntryForm::Conditional) {
      state = state.accept(ConditionalEntry{r.given, r.conditional_value});
      state.accepted_.back().source = r.source;
    } else {
      state = state.accept(r.value, r.source);
    }
  }
  return state;
}

std::optional<VarMask> ElicitationState::next_key() const {
  if (finished()) return std::nullopt;
  return sequence_[cursor_];
}

VarMask ElicitationState::require_next() const {
  if (finished()) {
    throw Error(ErrorCode::NotNextKey, "every constraint of this LEG has been visited");
  }
  return sequence_[cursor_];
}

std::vector<ConstraintRecord> ElicitationState::all_records() const {
  std::vector<ConstraintRecord> out;
  auto accepted_value = [&](VarMask key) -> const ConstraintRecord* {
    for (const auto& r : accepted_) {
      if (r.key == key) return &r;
    }
    return nullptr;
  };
  for (VarMask key : canonical_order(shape_.var_count)) {
    if (is_forced_zero_key(shape_, key)) {
      out.push_back({key, 0.0, ConstraintSource::ForcedZero});
      continue;
    }
    const VarMask closure = cutoff_closure(shape_, key);
    if (closure != key) {
      if (const auto* r = accepted_value(closure)) {
        out.push_back({key, r->value, ConstraintSource::DerivedFromCutoff});
      }
      continue;
    }
    if (const auto* r = accepted_value(key)) out.push_back(*r);
  }
  return out;
}

std::optional<double> ElicitationState::determined_value(VarMask subset) const {
  if (subset == 0) return 1.0;
  check_key(shape_, subset);
  if (is_forced_zero_key(shape_, subset)) return 0.0;
  const VarMask closure = cutoff_closure(shape_, subset);
  for (const auto& r : accepted_) {
    if (r.key == closure) return r.value;
  }
  const Interval iv = feasible_interval(subset);
  if (iv.hi - iv.lo <= kPointInterval) return 0.5 * (iv.lo + iv.hi);
  return std::nullopt;
}

std::vector<bool> ElicitationState::feasible_support() const {
  if (accepted_.empty()) return structural_support_;
  AtomProgram program(structural_support_, accepted_);
  const auto& cols = program.columns;
  std::vector<bool> support(structural_support_.size(), false);
  std::vector<bool> unknown(cols.size(), true);
  // Each round maximizes the mass on atoms not yet seen positive; any
  // positive atom of the optimum joins the support. A zero optimum proves
  // the rest are pinned to zero.
  while (true) {
    std::vector<double> cost(cols.size(), 0.0);
    bool any_unknown = false;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (unknown[j]) {
        cost[j] = -1.0;
        any_unknown = true;
      }
    }
    if (!any_unknown) break;
    const auto s = program.optimize(std::move(cost));
    if (-s.objective <= kSupportThreshold) break;
    bool progressed = false;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (s.x[j] > kSupportThreshold) {
        support[cols[j]] = true;
        if (unknown[j]) progressed = true;
        unknown[j] = false;
      }
    }
    if (!progressed) break;
  }
  return support;
}

Interval ElicitationState::feasible_interval(VarMask key) const {
  check_key(shape_, key);
  if (is_forced_zero_key(shape_, key)) return {0.0, 0.0};
  AtomProgram program(structural_support_, accepted_);
  auto row = conjunction_row(program.columns, key);
  const auto lo = program.optimize(row);
  for (double& c : row) c = -c;
  const auto hi = program.optimize(std::move(row));
  Interval iv{std::clamp(lo.objective, 0.0, 1.0), std::clamp(-hi.objective, 0.0, 1.0)};
  if (iv.lo > iv.hi) iv.lo = iv.hi = 0.5 * (iv.lo + iv.hi);
  return iv;
}

std::vector<double> ElicitationState::max_entropy_atoms() const {
  std::vector<ConjunctionConstraint> constraints;
  constraints.reserve(accepted_.size());
  for (const auto& r : accepted_) constraints.push_back({r.key, r.value});
  auto result = max_entropy(shape_.var_count, constraints, feasible_support());
  return std::move(result.atoms);
}

double ElicitationState::min_info_default(VarMask key) const {
  check_key(shape_, key);
  if (is_forced_zero_key(shape_, key)) return 0.0;
  const auto atoms = max_entropy_atoms();
  const double v =
      kernels::active().pattern_mass(atoms.data(), atoms.size(), key, key);
  const Interval iv = feasible_interval(key);
  return std::clamp(v, iv.lo, iv.hi);
}

Prompt ElicitationState::prompt() const {
  const VarMask key = require_next();
  return Prompt{key, feasible_interval(key), min_info_default(key), remaining()};
}

ElicitationState ElicitationState::with_record(ConstraintRecord r) const {
  ElicitationState next = *this;
  next.accepted_.push_back(r);
  ++next.cursor_;
  return next;
}

ElicitationState ElicitationState::accept(double joint_value, ConstraintSource source) const {
  const VarMask key = require_next();
  const Interval iv = feasible_interval(key);
  if (!std::isfinite(joint_value) || !iv.contains(joint_value, tol::kStructural)) {
    throw Error::out_of_range(joint_value, iv);
  }
  return with_record({key, std::clamp(joint_value, iv.lo, iv.hi), source, EntryForm::Joint});
}

ElicitationState ElicitationState::accept(ConditionalEntry entry) const {
  const VarMask key = require_next();
  if (entry.given == 0 || (entry.given & ~key) != 0 || entry.given == key) {
    throw Error(ErrorCode::InvalidArgument,
                "conditioning set must be a nonempty proper subset of " + key_text(key));
  }
  const auto given_mass = determined_value(entry.given);
  if (!given_mass) {
    throw Error(ErrorCode::UndeterminedCondition,
                "Pr" + key_text(entry.given) + " is not yet determined");
  }
  if (*given_mass < tol::kZeroMass) {
    throw Error(ErrorCode::ZeroCondition, "Pr" + key_text(entry.given) + " is zero");
  }
  const Interval iv = feasible_interval(key);
  const Interval conditional{std::min(1.0, iv.lo / *given_mass),
                             std::min(1.0, iv.hi / *given_mass)};
  if (!std::isfinite(entry.probability) || !conditional.contains(entry.probability, tol::kStructural)) {
    throw Error::out_of_range(entry.probability, conditional);
  }
  const double joint = std::clamp(entry.probability * *given_mass, iv.lo, iv.hi);
  return with_record({key, joint, ConstraintSource::UserSpecified, EntryForm::Conditional,
                      entry.given, entry.probability});
}

ElicitationState ElicitationState::accept_default() const {
  const VarMask key = require_next();
  return with_record({key, min_info_default(key), ConstraintSource::Defaulted, EntryForm::Joint});
}

ElicitationState ElicitationState::skip() const {
  require_next();
  ElicitationState next = *this;
  ++next.cursor_;
  return next;
}

Interval feasible_interval(const ElicitationState& state, VarMask key) {
  return state.feasible_interval(key);
}

double min_info_default(const ElicitationState& state, VarMask key) {
  return state.min_info_default(key);
}

ElicitationState accept_constraint(const ElicitationState& state, VarMask key, double joint_value) {
  if (state.next_key() != key) {
    throw Error(ErrorCode::NotNextKey, "constraint " + key_text(key) + " is not the next key");
  }
  return state.accept(joint_value);
}

ElicitationState accept_constraint(const ElicitationState& state, VarMask key,
                                   ConditionalEntry entry) {
  if (state.next_key() != key) {
    throw Error(ErrorCode::NotNextKey, "constraint " + key_text(key) + " is not the next key");
  }
  return state.accept(entry);
}

Cmd build_cmd(const ElicitationState& state, const DefaultPolicy& policy) {
  const LegShape& shape = state.shape();
  const int m = shape.var_count;
  const std::size_t n = std::size_t{1} << m;

  std::vector<double> table(n, 0.0);
  std::vector<bool> known(n, false);
  table[0] = 1.0;
  known[0] = true;
  for (const auto& r : state.accepted()) {
    table[r.key] = r.value;
    known[r.key] = true;
  }

  bool needs_defaults = false;
  for (VarMask key : state.sequence()) {
    if (known[key]) continue;
    if (!policy.max_specified_order || std::popcount(key) <= *policy.max_specified_order) {
      throw Error(ErrorCode::IncompleteConstraints,
                  "constraint " + key_text(key) + " must be specified before building");
    }
    needs_defaults = true;
  }

  if (needs_defaults) {
    auto defaults = state.max_entropy_atoms();
    kernels::active().superset_sum(defaults.data(), m);
    for (VarMask key : state.sequence()) {
      if (!known[key]) table[key] = defaults[key];
    }
  }
  for (VarMask key : canonical_order(m)) {
    if (is_forced_zero_key(shape, key)) {
      table[key] = 0.0;
    } else if (const VarMask c = cutoff_closure(shape, key); c != key) {
      table[key] = table[c];
    }
  }

  kernels::active().superset_diff(table.data(), m);
  for (std::size_t a = 0; a < n; ++a) {
    if (table[a] < -tol::kStructural) {
      throw Error(ErrorCode::InfeasibleConstraintSet,
                  "constraint values imply atom " + std::to_string(a) + " = " +
                      std::to_string(table[a]));
    }
    if (table[a] < 0.0 || is_forced_zero_atom(shape, static_cast<AtomIndex>(a))) table[a] = 0.0;
  }
  const auto& k = kernels::active();
  k.scale(table.data(), n, 1.0 / k.sum(table.data(), n));
  return CmdBuilder::adopt(m, std::move(table));
}

}  // namespace gbi
