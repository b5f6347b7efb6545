#include "gbi/legnet.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

#include "gbi/error.hpp"

namespace gbi {

std::string_view to_string(VarKind kind) noexcept {
  switch (kind) {
    case VarKind::Evidence: return "evidence";
    case VarKind::Hypothesis: return "hypothesis";
    case VarKind::Goal: return "goal";
  }
  return "hypothesis";
}

std::optional<VarKind> parse_var_kind(std::string_view s) noexcept {
  if (s == "evidence") return VarKind::Evidence;
  if (s == "hypothesis") return VarKind::Hypothesis;
  if (s == "goal") return VarKind::Goal;
  return std::nullopt;
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::CyclicNet: return "CyclicNet";
    case ViolationKind::SubtreeViolation: return "SubtreeViolation";
    case ViolationKind::DanglingRelation: return "DanglingRelation";
    case ViolationKind::OversizedLeg: return "OversizedLeg";
  }
  return "Unknown";
}

int Leg::position_of(VarId v) const noexcept {
  const auto it = std::find(vars.begin(), vars.end(), v);
  return it == vars.end() ? -1 : static_cast<int>(it - vars.begin());
}

std::vector<Intersection> compute_intersections(const std::vector<Leg>& legs) {
  std::vector<Intersection> out;
  for (LegId a = 0; a < legs.size(); ++a) {
    for (LegId b = a + 1; b < legs.size(); ++b) {
      Intersection e{a, b, {}};
      for (VarId v : legs[a].vars) {
        if (legs[b].contains(v)) e.shared.push_back(v);
      }
      if (!e.shared.empty()) {
        std::sort(e.shared.begin(), e.shared.end());
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

LegNet::LegNet(std::vector<Variable> variables, std::vector<Leg> legs,
               std::vector<StructuralRelation> relations, NetConfig config)
    : variables_(std::move(variables)),
      legs_(std::move(legs)),
      relations_(std::move(relations)),
      config_(config) {
  std::set<std::string, std::less<>> names;
  for (const auto& v : variables_) {
    if (v.name.empty()) throw Error(ErrorCode::InvalidNet, "variable with empty name");
    if (!names.insert(v.name).second) {
      throw Error(ErrorCode::InvalidNet, "duplicate variable name '" + v.name + "'");
    }
    if (v.is_bev && v.kind != VarKind::Evidence) {
      throw Error(ErrorCode::InvalidNet, "'" + v.name + "' is a BEV but not an evidence variable");
    }
  }
  std::set<std::string, std::less<>> leg_names;
  for (const auto& l : legs_) {
    if (!leg_names.insert(l.name).second) {
      throw Error(ErrorCode::InvalidNet, "duplicate LEG name '" + l.name + "'");
    }
    if (l.vars.empty()) throw Error(ErrorCode::InvalidNet, "LEG '" + l.name + "' is empty");
    std::set<VarId> seen;
    for (VarId v : l.vars) {
      if (v >= variables_.size()) {
        throw Error(ErrorCode::InvalidNet, "LEG '" + l.name + "' names an unknown variable");
      }
      if (!seen.insert(v).second) {
        throw Error(ErrorCode::InvalidNet,
                    "LEG '" + l.name + "' lists '" + variables_[v].name + "' twice");
      }
    }
    if (l.cmd && l.cmd->var_count() != static_cast<int>(l.vars.size())) {
      throw Error(ErrorCode::InvalidNet, "CMD of LEG '" + l.name + "' has the wrong size");
    }
  }
  for (const auto& r : relations_) {
    if (r.first >= variables_.size() || r.second >= variables_.size()) {
      throw Error(ErrorCode::InvalidNet, "relation names an unknown variable");
    }
    if (r.first == r.second) {
      throw Error(ErrorCode::InvalidNet, "relation between '" + variables_[r.first].name +
                                             "' and itself");
    }
  }
  intersections_ = compute_intersections(legs_);
  adjacency_.assign(legs_.size(), {});
  for (std::size_t e = 0; e < intersections_.size(); ++e) {
    adjacency_[intersections_[e].a].push_back(e);
    adjacency_[intersections_[e].b].push_back(e);
  }
}

std::optional<VarId> LegNet::find_variable(std::string_view name) const noexcept {
  for (VarId v = 0; v < variables_.size(); ++v) {
    if (variables_[v].name == name) return v;
  }
  return std::nullopt;
}

std::optional<LegId> LegNet::find_leg(std::string_view name) const noexcept {
  for (LegId l = 0; l < legs_.size(); ++l) {
    if (legs_[l].name == name) return l;
  }
  return std::nullopt;
}

VarId LegNet::variable_id(std::string_view name) const {
  if (auto v = find_variable(name)) return *v;
  throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(name) + "'");
}

LegId LegNet::leg_id(std::string_view name) const {
  if (auto l = find_leg(name)) return *l;
  throw Error(ErrorCode::NotFound, "unknown LEG '" + std::string(name) + "'");
}

std::optional<LegId> LegNet::host_of(VarId v) const noexcept {
  for (LegId l = 0; l < legs_.size(); ++l) {
    if (legs_[l].contains(v)) return l;
  }
  return std::nullopt;
}

std::vector<LocalRelation> LegNet::relations_for(LegId l) const {
  const Leg& leg = legs_.at(l);
  std::vector<LocalRelation> out;
  for (const auto& r : relations_) {
    const int a = leg.position_of(r.first);
    const int b = leg.position_of(r.second);
    if (a >= 0 && b >= 0) out.push_back({r.kind, a, b});
  }
  return out;
}

LegNet LegNet::with_cmds(std::vector<std::optional<Cmd>> cmds) const {
  if (cmds.size() != legs_.size()) {
    throw Error(ErrorCode::InvalidArgument, "one CMD slot per LEG required");
  }
  std::vector<Leg> legs = legs_;
  for (std::size_t i = 0; i < legs.size(); ++i) legs[i].cmd = std::move(cmds[i]);
  return LegNet(variables_, std::move(legs), relations_, config_);
}

bool LegNet::all_cmds_present() const noexcept {
  return std::all_of(legs_.begin(), legs_.end(), [](const Leg& l) { return l.cmd.has_value(); });
}

bool ValidationReport::has(ViolationKind kind) const noexcept {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

ValidationReport validate(const LegNet& net) {
  ValidationReport report;
  const auto& legs = net.legs();
  const auto& vars = net.variables();

  for (const auto& l : legs) {
    if (static_cast<int>(l.vars.size()) > net.config().max_leg_vars) {
      report.violations.push_back(
          {ViolationKind::OversizedLeg, "LEG '" + l.name + "' has " + std::to_string(l.vars.size()) +
                                            " variables, cap is " +
                                            std::to_string(net.config().max_leg_vars)});
    }
  }

  DisjointSets components(legs.size());
  for (const auto& e : net.intersections()) {
    if (!components.unite(e.a, e.b)) {
      report.violations.push_back({ViolationKind::CyclicNet, "intersection of '" + legs[e.a].name +
                                                                 "' and '" + legs[e.b].name +
                                                                 "' closes a cycle"});
    }
  }

  // Each variable's LEGs must induce a connected subgraph.
  for (VarId v = 0; v < vars.size(); ++v) {
    std::vector<LegId> holders;
    for (LegId l = 0; l < legs.size(); ++l) {
      if (legs[l].contains(v)) holders.push_back(l);
    }
    if (holders.size() < 2) continue;
    DisjointSets sub(legs.size());
    for (const auto& e : net.intersections()) {
      if (legs[e.a].contains(v) && legs[e.b].contains(v)) sub.unite(e.a, e.b);
    }
    const std::size_t root = sub.find(holders.front());
    for (LegId l : holders) {
      if (sub.find(l) != root) {
        report.violations.push_back({ViolationKind::SubtreeViolation,
                                     "LEGs holding '" + vars[v].name + "' are not connected"});
        break;
      }
    }
  }

  for (const auto& r : net.relations()) {
    const bool co_resident = std::any_of(legs.begin(), legs.end(), [&](const Leg& l) {
      return l.contains(r.first) && l.contains(r.second);
    });
    if (!co_resident) {
      report.violations.push_back({ViolationKind::DanglingRelation,
                                   std::string(r.kind == RelationKind::Forbidden ? "forbidden"
                                                                                 : "cutoff") +
                                       " relation between '" + vars[r.first].name + "' and '" +
                                       vars[r.second].name + "' spans no single LEG"});
    }
  }
  return report;
}

StorageFootprint storage_footprint(const LegNet& net) {
  StorageFootprint f;
  std::set<VarId> distinct;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  for (const auto& l : net.legs()) {
    const std::size_t m = l.vars.size();
    const std::uint64_t entries = m >= 64 ? kMax : (std::uint64_t{1} << m);
    f.cmd_entries = (kMax - f.cmd_entries < entries) ? kMax : f.cmd_entries + entries;
    distinct.insert(l.vars.begin(), l.vars.end());
  }
  f.full_joint_entries = distinct.size() >= 64 ? kMax : (std::uint64_t{1} << distinct.size());
  return f;
}

}  // namespace gbi
