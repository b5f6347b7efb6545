#pragma once

// Knowledge-base structure: variables, Local Event Groups (LEGs), structural
// relations between variables, and the intersection graph that probability
// flows through during updating.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gbi/dist.hpp"

namespace gbi {

using VarId = std::size_t;
using LegId = std::size_t;

enum class VarKind { Evidence, Hypothesis, Goal };

std::string_view to_string(VarKind kind) noexcept;
std::optional<VarKind> parse_var_kind(std::string_view s) noexcept;

struct Variable {
  std::string name;
  VarKind kind = VarKind::Hypothesis;
  // Binary evidence variable: observed as certainly occurring or not.
  bool is_bev = false;
};

struct Leg {
  std::string name;
  // Declared order; variable i occupies bit i of the LEG's atoms.
  std::vector<VarId> vars;
  std::optional<Cmd> cmd;

  // Bit position of `v`, or -1.
  int position_of(VarId v) const noexcept;
  bool contains(VarId v) const noexcept { return position_of(v) >= 0; }
};

enum class RelationKind { Forbidden, Cutoff };

// Forbidden: `first` and `second` never co-occur (unordered).
// Cutoff: `first` (dependent) cannot occur unless `second` (prerequisite) does.
struct StructuralRelation {
  RelationKind kind = RelationKind::Forbidden;
  VarId first = 0;
  VarId second = 0;
};

// A relation restated in one LEG's bit positions.
struct LocalRelation {
  RelationKind kind = RelationKind::Forbidden;
  int first = 0;
  int second = 0;
};

// Two LEGs with a nonempty shared variable set; a < b, shared sorted by id.
struct Intersection {
  LegId a = 0;
  LegId b = 0;
  std::vector<VarId> shared;
};

struct NetConfig {
  int max_leg_vars = kDefaultMaxVars;
};

// Immutable snapshot. Construction rejects malformed input (duplicate names,
// dangling ids, duplicate or missing LEG members) with InvalidNet; semantic
// problems such as cycles are reported by validate().
class LegNet {
 public:
  LegNet(std::vector<Variable> variables, std::vector<Leg> legs,
         std::vector<StructuralRelation> relations, NetConfig config = {});

  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const std::vector<Leg>& legs() const noexcept { return legs_; }
  const std::vector<StructuralRelation>& relations() const noexcept { return relations_; }
  const std::vector<Intersection>& intersections() const noexcept { return intersections_; }
  const NetConfig& config() const noexcept { return config_; }

  const Variable& variable(VarId v) const { return variables_.at(v); }
  const Leg& leg(LegId l) const { return legs_.at(l); }

  std::optional<VarId> find_variable(std::string_view name) const noexcept;
  std::optional<LegId> find_leg(std::string_view name) const noexcept;
  VarId variable_id(std::string_view name) const;  // throws UnknownVariable
  LegId leg_id(std::string_view name) const;       // throws NotFound

  // First LEG, in declaration order, containing `v`.
  std::optional<LegId> host_of(VarId v) const noexcept;

  // Indices into intersections() touching `l`.
  const std::vector<std::size_t>& edges_of(LegId l) const { return adjacency_.at(l); }

  std::vector<LocalRelation> relations_for(LegId l) const;

  // New snapshot with the given CMDs (one per LEG, empty for none).
  LegNet with_cmds(std::vector<std::optional<Cmd>> cmds) const;
  bool all_cmds_present() const noexcept;

 private:
  std::vector<Variable> variables_;
  std::vector<Leg> legs_;
  std::vector<StructuralRelation> relations_;
  NetConfig config_;
  std::vector<Intersection> intersections_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

std::vector<Intersection> compute_intersections(const std::vector<Leg>& legs);

enum class ViolationKind { CyclicNet, SubtreeViolation, DanglingRelation, OversizedLeg };

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationKind kind) const noexcept;
};

ValidationReport validate(const LegNet& net);

struct StorageFootprint {
  std::uint64_t cmd_entries = 0;
  // 2^n for the n distinct variables in LEGs; saturates at UINT64_MAX.
  std::uint64_t full_joint_entries = 0;
};

StorageFootprint storage_footprint(const LegNet& net);

}  // namespace gbi
