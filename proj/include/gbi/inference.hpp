#pragma once

// Generalized Bayesian updating over a LEG net.
//
// When LEG B receives a new CMD, every neighbour A is updated atom by atom:
//
//   Pr'(A, a) = Pr(A, a) * Pr'(B ↓ I = a ↓ I) / Pr(B ↓ I = a ↓ I),  I = A ∩ B
//
// where ↓ I sums out everything except the shared variables and the Pr on
// the right are always the most recent CMDs, never the original priors.
// Updates spread breadth-first over the intersection tree, so every edge's
// shared marginals agree again once an assertion completes.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gbi/dist.hpp"
#include "gbi/legnet.hpp"

namespace gbi {

struct EvidenceAssertion {
  VarId variable = 0;
  bool observed = true;
  std::uint64_t sequence = 0;  // assigned by the session
};

enum class StepKind { Conditioning, Propagation };

struct UpdateStep {
  StepKind kind = StepKind::Propagation;
  LegId target = 0;
  // Empty for conditioning on evidence.
  std::optional<LegId> source;
  // Variables the marginals below range over: the intersection for
  // propagation, the asserted variables for conditioning. Bit j of a
  // marginal index is shared[j].
  std::vector<VarId> shared;
  std::vector<double> prior_marginal;
  std::vector<double> posterior_marginal;
  // posterior[a] = prior[a] * multipliers[a], renormalization included.
  std::vector<double> multipliers;
  // |1 - mass| before renormalization; flagged when above 1e-6.
  double drift = 0.0;
  bool drift_warning = false;
};

inline constexpr double kDriftWarning = 1e-6;

struct GbiUpdate {
  Cmd posterior;
  std::vector<double> multipliers;
  double drift = 0.0;
};

// Updates `target` after the neighbouring CMD moved from `prior_source` to
// `post_source`. shared_in_target[j] and shared_in_source[j] are the bit
// positions of the j-th shared variable in each LEG.
GbiUpdate gbi_update(const Cmd& target, const Cmd& prior_source, const Cmd& post_source,
                     std::span<const int> shared_in_target, std::span<const int> shared_in_source);

struct EdgeDiscrepancy {
  LegId a = 0;
  LegId b = 0;
  double max_abs_diff = 0.0;
};

struct ConsistencyReport {
  std::vector<EdgeDiscrepancy> edges;

  double max_discrepancy() const noexcept;
  bool consistent(double tolerance) const noexcept { return max_discrepancy() <= tolerance; }
};

// Requires a CMD on every LEG.
ConsistencyReport check_consistency(const LegNet& net);

// Positions of the edge's shared variables inside LEG `l`.
std::vector<int> shared_positions(const LegNet& net, const Intersection& edge, LegId l);

class Session {
 public:
  // The net must validate cleanly and carry consistent CMDs on every LEG.
  explicit Session(LegNet prior);

  const LegNet& base() const noexcept { return *base_; }
  const LegNet& current() const noexcept { return *current_; }
  const std::vector<EvidenceAssertion>& evidence() const noexcept { return evidence_; }
  const std::vector<UpdateStep>& trace() const noexcept { return trace_; }

  std::optional<bool> observed(VarId v) const noexcept;
  // Marginal of `v` from its host LEG's latest CMD.
  double marginal(VarId v) const;
  const Cmd& cmd(LegId l) const { return *current_->leg(l).cmd; }

 private:
  Session() = default;

  std::shared_ptr<const LegNet> base_;
  std::shared_ptr<const LegNet> current_;
  std::vector<EvidenceAssertion> evidence_;
  std::vector<UpdateStep> trace_;
  std::uint64_t next_sequence_ = 1;

  friend Session propagate(const Session&, LegId, Cmd);
  friend Session assert_evidence(const Session&, std::span<const EvidenceAssertion>);
};

// Replaces `origin`'s CMD by `replacement` and updates the rest of its tree.
Session propagate(const Session& session, LegId origin, Cmd replacement);

// Conditions each host LEG on its share of the assertions, then propagates.
// Assertions are grouped by host LEG in order of first appearance. Either
// every assertion is applied or the call throws and nothing changes.
Session assert_evidence(const Session& session, std::span<const EvidenceAssertion> assertions);

enum class RankDirection { MostLikely, LeastLikely };

struct RankedEvidence {
  VarId variable = 0;
  double marginal = 0.0;
};

// Unasserted BEVs by current marginal; ties by name.
std::vector<RankedEvidence> rank_evidence(const Session& session, RankDirection direction);

struct VariableMarginal {
  VarId variable = 0;
  double marginal = 0.0;
};

std::vector<VariableMarginal> goal_report(const Session& session);
std::vector<VariableMarginal> all_marginals(const Session& session);

}  // namespace gbi
