#include "gbi/inference.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "gbi/error.hpp"
#include "gbi/kernels.hpp"

namespace gbi {

GbiUpdate gbi_update(const Cmd& target, const Cmd& prior_source, const Cmd& post_source,
                     std::span<const int> shared_in_target, std::span<const int> shared_in_source) {
  if (shared_in_target.empty() || shared_in_target.size() != shared_in_source.size()) {
    throw Error(ErrorCode::InvalidArgument, "intersection must be nonempty and matched");
  }
  if (prior_source.var_count() != post_source.var_count()) {
    throw Error(ErrorCode::InvalidArgument, "prior and posterior source CMDs differ in size");
  }
  const Cmd before = marginalize(prior_source, shared_in_source);
  const Cmd after = marginalize(post_source, shared_in_source);
  const Cmd target_shared = marginalize(target, shared_in_target);
  if (max_abs_diff(before.atoms(), target_shared.atoms()) > tol::kStructural) {
    throw Error(ErrorCode::InconsistentNet,
                "target and source disagree on their shared marginal before the update");
  }

  std::vector<double> ratio(before.size(), 0.0);
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    if (before[i] < tol::kZeroMass) {
      if (after[i] > tol::kStructural) {
        throw Error(ErrorCode::ImpossibleEvidence,
                    "posterior gives mass to a shared event with zero prior");
      }
      ratio[i] = 0.0;
    } else {
      ratio[i] = after[i] / before[i];
    }
  }

  const auto index = restriction_index(target.var_count(), shared_in_target);
  std::vector<double> atoms(target.atoms().begin(), target.atoms().end());
  const auto& k = kernels::active();
  k.gather_scale(atoms.data(), atoms.size(), ratio.data(), index.data());
  const double mass = k.sum(atoms.data(), atoms.size());
  if (mass < tol::kZeroMass) {
    throw Error(ErrorCode::ImpossibleEvidence, "update leaves the target with no mass");
  }
  k.scale(atoms.data(), atoms.size(), 1.0 / mass);

  std::vector<double> multipliers(atoms.size());
  for (std::size_t a = 0; a < atoms.size(); ++a) multipliers[a] = ratio[index[a]] / mass;
  return GbiUpdate{CmdBuilder::adopt(target.var_count(), std::move(atoms)),
                   std::move(multipliers), std::abs(1.0 - mass)};
}

double ConsistencyReport::max_discrepancy() const noexcept {
  double d = 0.0;
  for (const auto& e : edges) d = std::max(d, e.max_abs_diff);
  return d;
}

std::vector<int> shared_positions(const LegNet& net, const Intersection& edge, LegId l) {
  std::vector<int> pos;
  pos.reserve(edge.shared.size());
  for (VarId v : edge.shared) pos.push_back(net.leg(l).position_of(v));
  return pos;
}

ConsistencyReport check_consistency(const LegNet& net) {
  if (!net.all_cmds_present()) {
    throw Error(ErrorCode::InvalidArgument, "consistency check needs a CMD on every LEG");
  }
  ConsistencyReport report;
  for (const auto& e : net.intersections()) {
    const Cmd ma = marginalize(*net.leg(e.a).cmd, shared_positions(net, e, e.a));
    const Cmd mb = marginalize(*net.leg(e.b).cmd, shared_positions(net, e, e.b));
    report.edges.push_back({e.a, e.b, max_abs_diff(ma.atoms(), mb.atoms())});
  }
  return report;
}

Session::Session(LegNet prior) {
  const auto report = validate(prior);
  if (!report.ok()) {
    throw Error(ErrorCode::InvalidNet, std::string(to_string(report.violations.front().kind)) +
                                           ": " + report.violations.front().message);
  }
  if (!prior.all_cmds_present()) {
    throw Error(ErrorCode::InvalidNet, "every LEG needs a CMD before consultation");
  }
  const double gap = check_consistency(prior).max_discrepancy();
  if (gap > tol::kStructural) {
    throw Error(ErrorCode::InconsistentNet,
                "prior CMDs disagree on a shared marginal by " + std::to_string(gap));
  }
  base_ = std::make_shared<const LegNet>(std::move(prior));
  current_ = base_;
}

std::optional<bool> Session::observed(VarId v) const noexcept {
  for (const auto& e : evidence_) {
    if (e.variable == v) return e.observed;
  }
  return std::nullopt;
}

double Session::marginal(VarId v) const {
  const auto host = current_->host_of(v);
  if (!host) {
    throw Error(ErrorCode::UnknownVariable,
                "variable '" + current_->variable(v).name + "' belongs to no LEG");
  }
  return gbi::marginal(cmd(*host), current_->leg(*host).position_of(v));
}

namespace {

std::vector<double> copy_atoms(const Cmd& c) { return {c.atoms().begin(), c.atoms().end()}; }

// Breadth-first from `origin`; cmds[origin] already holds the new CMD.
std::vector<UpdateStep> spread(const LegNet& net, std::vector<Cmd>& cmds, LegId origin,
                               const Cmd& origin_prior) {
  std::vector<UpdateStep> steps;
  std::vector<std::optional<Cmd>> previous(cmds.size());
  previous[origin] = origin_prior;
  std::vector<bool> visited(cmds.size(), false);
  visited[origin] = true;
  std::deque<LegId> queue{origin};
  while (!queue.empty()) {
    const LegId from = queue.front();
    queue.pop_front();
    for (std::size_t ei : net.edges_of(from)) {
      const Intersection& e = net.intersections()[ei];
      const LegId to = e.a == from ? e.b : e.a;
      if (visited[to]) continue;
      visited[to] = true;
      const auto in_to = shared_positions(net, e, to);
      const auto in_from = shared_positions(net, e, from);
      UpdateStep step;
      step.kind = StepKind::Propagation;
      step.target = to;
      step.source = from;
      step.shared = e.shared;
      step.prior_marginal = copy_atoms(marginalize(*previous[from], in_from));
      step.posterior_marginal = copy_atoms(marginalize(cmds[from], in_from));
      std::optional<GbiUpdate> update;
      try {
        update = gbi_update(cmds[to], *previous[from], cmds[from], in_to, in_from);
      } catch (const Error& err) {
        throw Error(err.code(), "updating '" + net.leg(to).name + "' from '" +
                                    net.leg(from).name + "': " + err.what());
      }
      GbiUpdate& u = *update;
      step.multipliers = std::move(u.multipliers);
      step.drift = u.drift;
      step.drift_warning = u.drift > kDriftWarning;
      previous[to] = std::move(cmds[to]);
      cmds[to] = std::move(u.posterior);
      steps.push_back(std::move(step));
      queue.push_back(to);
    }
  }
  return steps;
}

std::vector<Cmd> current_cmds(const Session& s) {
  std::vector<Cmd> cmds;
  for (const auto& l : s.current().legs()) cmds.push_back(*l.cmd);
  return cmds;
}

std::shared_ptr<const LegNet> snapshot(const LegNet& structure, std::vector<Cmd> cmds) {
  std::vector<std::optional<Cmd>> slots;
  for (auto& c : cmds) slots.emplace_back(std::move(c));
  return std::make_shared<const LegNet>(structure.with_cmds(std::move(slots)));
}

}  // namespace

Session propagate(const Session& session, LegId origin, Cmd replacement) {
  const LegNet& net = session.current();
  if (origin >= net.legs().size()) throw Error(ErrorCode::NotFound, "unknown origin LEG");
  if (replacement.var_count() != static_cast<int>(net.leg(origin).vars.size())) {
    throw Error(ErrorCode::InvalidArgument, "replacement CMD has the wrong size");
  }
  auto cmds = current_cmds(session);
  const Cmd prior = cmds[origin];
  cmds[origin] = std::move(replacement);
  auto steps = spread(net, cmds, origin, prior);

  Session next = session;
  next.current_ = snapshot(net, std::move(cmds));
  next.trace_.insert(next.trace_.end(), std::make_move_iterator(steps.begin()),
                     std::make_move_iterator(steps.end()));
  return next;
}

Session assert_evidence(const Session& session, std::span<const EvidenceAssertion> assertions) {
  const LegNet& net = session.current();
  std::vector<LegId> hosts;
  std::map<LegId, std::vector<EvidenceAssertion>> groups;
  std::map<VarId, bool> batch;
  for (const auto& a : assertions) {
    if (a.variable >= net.variables().size()) {
      throw Error(ErrorCode::UnknownVariable, "unknown evidence variable");
    }
    const Variable& v = net.variable(a.variable);
    if (!v.is_bev) {
      throw Error(ErrorCode::NotEvidenceVariable, "'" + v.name + "' is not a binary evidence variable");
    }
    const auto host = net.host_of(a.variable);
    if (!host) throw Error(ErrorCode::UnknownVariable, "'" + v.name + "' belongs to no LEG");
    const auto prior_obs = session.observed(a.variable);
    const auto [it, inserted] = batch.emplace(a.variable, a.observed);
    if ((prior_obs && *prior_obs != a.observed) || (!inserted && it->second != a.observed)) {
      throw Error(ErrorCode::ConflictingEvidence,
                  "'" + v.name + "' was already asserted with the opposite value");
    }
    if (prior_obs || !inserted) continue;
    if (!groups.contains(*host)) hosts.push_back(*host);
    groups[*host].push_back(a);
  }

  Session next = session;
  for (LegId host : hosts) {
    const Leg& leg = net.leg(host);
    Assignment assignment;
    UpdateStep step;
    step.kind = StepKind::Conditioning;
    step.target = host;
    std::vector<int> positions;
    for (const auto& a : groups[host]) {
      const int pos = leg.position_of(a.variable);
      assignment.vars |= VarMask{1} << pos;
      if (a.observed) assignment.values |= VarMask{1} << pos;
      positions.push_back(pos);
      step.shared.push_back(a.variable);
    }
    const Cmd& before = next.cmd(host);
    Cmd after = condition(before, assignment);
    step.prior_marginal = copy_atoms(marginalize(before, positions));
    step.posterior_marginal = copy_atoms(marginalize(after, positions));
    const double kept = conjunction_prob(before, 0) > 0.0
                            ? kernels::active().pattern_mass(before.atoms().data(), before.size(),
                                                             assignment.vars, assignment.values)
                            : 0.0;
    step.multipliers.resize(before.size());
    for (AtomIndex a = 0; a < before.size(); ++a) {
      step.multipliers[a] = (a & assignment.vars) == assignment.values ? 1.0 / kept : 0.0;
    }
    next.trace_.push_back(std::move(step));
    next = propagate(next, host, std::move(after));
    for (auto a : groups[host]) {
      a.sequence = next.next_sequence_++;
      next.evidence_.push_back(a);
    }
  }
  return next;
}

namespace {

std::vector<VariableMarginal> marginals_where(const Session& s, auto&& keep) {
  std::vector<VariableMarginal> out;
  const auto& vars = s.current().variables();
  for (VarId v = 0; v < vars.size(); ++v) {
    if (keep(vars[v]) && s.current().host_of(v)) out.push_back({v, s.marginal(v)});
  }
  return out;
}

}  // namespace

std::vector<RankedEvidence> rank_evidence(const Session& session, RankDirection direction) {
  std::vector<RankedEvidence> out;
  const auto& vars = session.current().variables();
  for (VarId v = 0; v < vars.size(); ++v) {
    if (!vars[v].is_bev || session.observed(v) || !session.current().host_of(v)) continue;
    out.push_back({v, session.marginal(v)});
  }
  std::sort(out.begin(), out.end(), [&](const RankedEvidence& x, const RankedEvidence& y) {
    if (x.marginal != y.marginal) {
      return direction == RankDirection::MostLikely ? x.marginal > y.marginal
                                                    : x.marginal < y.marginal;
    }
    return vars[x.variable].name < vars[y.variable].name;
  });
  return out;
}

std::vector<VariableMarginal> goal_report(const Session& session) {
  return marginals_where(session, [](const Variable& v) { return v.kind == VarKind::Goal; });
}

std::vector<VariableMarginal> all_marginals(const Session& session) {
  return marginals_where(session, [](const Variable&) { return true; });
}

}  // namespace gbi
