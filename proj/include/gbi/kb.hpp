#pragma once

// Knowledge-base and session documents: the versioned JSON file formats and
// the glue between them and the core types.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gbi/elicitation.hpp"
#include "gbi/inference.hpp"
#include "gbi/legnet.hpp"

namespace gbi::kb {

inline constexpr int kFormatVersion = 1;

struct LegRecord {
  std::string name;
  std::vector<std::string> variables;
  // Keys above this order may be defaulted by `build`; empty means all
  // must be specified unless the build overrides it.
  std::optional<int> default_order;
  std::vector<ConstraintRecord> constraints;
  // Cached CMD, recomputable from the constraints.
  std::optional<std::vector<double>> cmd;

  bool operator==(const LegRecord&) const = default;
};

struct RelationRecord {
  RelationKind kind = RelationKind::Forbidden;
  // For a cutoff, `first` can occur only if `second` does.
  std::string first;
  std::string second;

  bool operator==(const RelationRecord&) const = default;
};

struct VariableRecord {
  std::string name;
  VarKind kind = VarKind::Hypothesis;
  bool bev = false;

  bool operator==(const VariableRecord&) const = default;
};

struct KbDocument {
  int format_version = kFormatVersion;
  std::string name;
  std::string description;
  int max_leg_vars = kDefaultMaxVars;
  std::vector<VariableRecord> variables;
  std::vector<LegRecord> legs;
  std::vector<RelationRecord> relations;

  bool operator==(const KbDocument&) const = default;
};

KbDocument parse_kb(std::string_view text);
std::string serialize(const KbDocument& doc);

KbDocument load_kb(const std::string& path);
// Writes through a temporary file and rename.
void save_text(const std::string& path, const std::string& text);

// Structure only; CMDs are attached by `load_net`.
LegNet structure_of(const KbDocument& doc);

// Elicitation state of one LEG replayed from its records.
ElicitationState leg_state(const KbDocument& doc, LegId leg);

// Replaces the records of `leg` with every record the state knows and drops
// the LEG's cached CMD.
KbDocument with_leg_state(const KbDocument& doc, LegId leg, const ElicitationState& state);

struct BuildOptions {
  // Overrides each LEG's default_order when set.
  std::optional<int> max_order;
};

// Rebuilds every LEG's CMD and stores it in the cache. Records are left as
// they are.
KbDocument build(const KbDocument& doc, const BuildOptions& options = {});

// Net with a CMD on every LEG. Cached CMDs are used as they are unless
// `strict`, in which case each is compared with a rebuild and a mismatch
// above 1e-9 is a SchemaError at that cache. Missing caches are built.
LegNet load_net(const KbDocument& doc, bool strict = false);

struct VariableSummary {
  std::string name;
  VarKind kind;
  double marginal;
  std::optional<bool> observed;
};

std::vector<VariableSummary> summarize(const Session& session);

struct SessionDocument {
  int format_version = kFormatVersion;
  // Path or name of the knowledge base the session was run against.
  std::string kb;
  struct Evidence {
    std::string variable;
    bool observed = true;
    std::uint64_t sequence = 0;
    bool operator==(const Evidence&) const = default;
  };
  std::vector<Evidence> evidence;
  struct Step {
    std::string kind;  // "conditioning" or "propagation"
    std::string target;
    std::optional<std::string> source;
    std::vector<std::string> shared;
    std::vector<double> prior_marginal;
    std::vector<double> posterior_marginal;
    std::vector<double> multipliers;
    double drift = 0.0;
    bool drift_warning = false;
    bool operator==(const Step&) const = default;
  };
  std::vector<Step> trace;
  struct Marginal {
    std::string variable;
    double value = 0.0;
    bool operator==(const Marginal&) const = default;
  };
  std::vector<Marginal> marginals;

  bool operator==(const SessionDocument&) const = default;
};

SessionDocument session_document(const std::string& kb_ref, const Session& session);
SessionDocument parse_session(std::string_view text);
std::string serialize(const SessionDocument& doc);

// Replays the evidence log, one assertion at a time in sequence order.
Session replay(const LegNet& prior, const SessionDocument& doc);
// Largest difference between the replayed and the recorded marginals.
double replay_gap(const LegNet& prior, const SessionDocument& doc);

// Evidence list in "name=true,name2=false" form.
std::vector<EvidenceAssertion> parse_evidence_list(const LegNet& net, std::string_view text);

// Key as the names of its variables, in LEG declaration order.
std::vector<std::string> key_names(const LegNet& net, LegId leg, VarMask key);
VarMask key_from_names(const LegNet& net, LegId leg, const std::vector<std::string>& names);

}  // namespace gbi::kb
