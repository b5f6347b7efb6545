#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "gbi/error.hpp"
#include "gbi/inference.hpp"
#include "support/random_nets.hpp"

using namespace gbi;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a gbi::Error");
  return ErrorCode::InvalidArgument;
}

const std::vector<int> kFirst{0};

// Largest atom difference between every session CMD and the oracle joint
// conditioned on the same evidence.
double oracle_gap(const Session& s, const std::vector<double>& conditioned) {
  double gap = 0.0;
  for (const auto& leg : s.current().legs()) {
    const auto want = testing::joint_marginal(conditioned, leg.vars);
    gap = std::max(gap, max_abs_diff(leg.cmd->atoms(), want));
  }
  return gap;
}

std::vector<EvidenceAssertion> assertions_for(const std::vector<VarId>& vars, std::uint32_t bits) {
  std::vector<EvidenceAssertion> out;
  for (std::size_t k = 0; k < vars.size(); ++k) out.push_back({vars[k], ((bits >> k) & 1U) != 0});
  return out;
}

Assignment global_assignment(const std::vector<VarId>& vars, std::uint32_t bits) {
  Assignment a;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    a.vars |= VarMask{1} << vars[k];
    if ((bits >> k) & 1U) a.values |= VarMask{1} << vars[k];
  }
  return a;
}

}  // namespace

TEST_CASE("update multiplier on a fixture atom") {
  // bit 0 Folk-Precip, bit 1 another variable; Pr(Folk-Precip) = 0.55.
  const Cmd target({0.25, 0.3957, 0.20, 0.1543});
  const Cmd before({0.45, 0.55});
  const Cmd after({0.43, 0.57});
  const auto u = gbi_update(target, before, after, kFirst, kFirst);
  CHECK(std::abs(u.posterior[0b11] - 0.1599) < 5e-5);
  CHECK(u.posterior[0b11] == doctest::Approx(0.1543 * 0.57 / 0.55).epsilon(1e-12));
  CHECK(marginal(u.posterior, 0) == doctest::Approx(0.57).epsilon(1e-12));
  for (AtomIndex a = 0; a < 4; ++a) {
    CHECK(std::abs(u.posterior[a] - target[a] * u.multipliers[a]) < 1e-12);
  }
}

TEST_CASE("unchanged source leaves the target unchanged") {
  const Cmd target({0.25, 0.3957, 0.20, 0.1543});
  const Cmd src({0.45, 0.55});
  const auto u = gbi_update(target, src, src, kFirst, kFirst);
  CHECK(max_abs_diff(u.posterior.atoms(), target.atoms()) < 1e-12);
  for (double m : u.multipliers) CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("update preconditions and impossible posteriors") {
  const Cmd target({0.25, 0.3957, 0.20, 0.1543});
  CHECK(code_of([&] { gbi_update(target, Cmd({0.5, 0.5}), Cmd({0.4, 0.6}), kFirst, kFirst); }) ==
        ErrorCode::InconsistentNet);
  const Cmd zero_target({0.5, 0.0, 0.5, 0.0});
  CHECK(code_of([&] { gbi_update(zero_target, Cmd({1.0, 0.0}), Cmd({0.5, 0.5}), kFirst, kFirst); }) ==
        ErrorCode::ImpossibleEvidence);
  const auto u = gbi_update(zero_target, Cmd({1.0, 0.0}), Cmd({1.0, 0.0}), kFirst, kFirst);
  CHECK(u.posterior[1] == 0.0);
  CHECK(u.multipliers[1] == 0.0);
  CHECK(code_of([&] { gbi_update(target, Cmd({0.45, 0.55}), Cmd({0.45, 0.55}), {}, {}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("two LEGs over a four-variable factorized joint") {
  // LEG A = {x0, x1, x2}, LEG B = {x2, x3}; the joint factorizes over x2.
  std::mt19937_64 rng(51);
  const auto a = testing::random_atoms(rng, 3);
  const auto b_given = testing::random_atoms(rng, 1);
  const auto b_given_not = testing::random_atoms(rng, 1);
  std::vector<double> joint(16);
  for (std::uint32_t x = 0; x < 16; ++x) {
    const auto& cond = (x >> 2) & 1U ? b_given : b_given_not;
    joint[x] = a[x & 7U] * cond[(x >> 3) & 1U];
  }
  const Cmd ca(testing::joint_marginal(joint, {0, 1, 2}));
  const Cmd cb(testing::joint_marginal(joint, {2, 3}));
  // Condition A on x0 = 1 and push to B through x2.
  const Cmd ca_post = condition(ca, Assignment{1, 1});
  const std::vector<int> in_b{0};
  const std::vector<int> in_a{2};
  const auto u = gbi_update(cb, ca, ca_post, in_b, in_a);
  const auto want = testing::joint_marginal(testing::condition_joint(joint, Assignment{1, 1}), {2, 3});
  CHECK(max_abs_diff(u.posterior.atoms(), want) < 1e-12);
}

TEST_CASE("consistency report") {
  std::mt19937_64 rng(52);
  auto rn = testing::random_star_net(rng, 2);
  CHECK(check_consistency(rn.net).max_discrepancy() < 1e-12);

  // Move 0.01 between two atoms of leaf 1 that differ in the shared variable.
  std::vector<std::optional<Cmd>> cmds;
  for (const auto& l : rn.net.legs()) cmds.push_back(l.cmd);
  const Leg& leaf = rn.net.leg(1);
  const int shared = leaf.position_of(0);
  std::vector<double> atoms(cmds[1]->atoms().begin(), cmds[1]->atoms().end());
  const AtomIndex hi = std::max_element(atoms.begin(), atoms.end()) - atoms.begin();
  atoms[hi] -= 0.01;
  atoms[hi ^ (1U << shared)] += 0.01;
  cmds[1] = Cmd(atoms);
  const auto report = check_consistency(rn.net.with_cmds(cmds));
  CHECK(report.max_discrepancy() == doctest::Approx(0.01).epsilon(1e-9));
  CHECK_FALSE(report.consistent(1e-9));

  const LegNet single({{"a", VarKind::Evidence, true}}, {{"A", {0}, Cmd({0.5, 0.5})}}, {});
  CHECK(check_consistency(single).edges.empty());
  CHECK(code_of([&] { check_consistency(rn.net.with_cmds({std::nullopt, cmds[1], cmds[2]})); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("sessions reject invalid or inconsistent nets") {
  std::mt19937_64 rng(53);
  auto rn = testing::random_star_net(rng, 2);
  std::vector<std::optional<Cmd>> cmds;
  for (const auto& l : rn.net.legs()) cmds.push_back(l.cmd);
  cmds[2] = Cmd::uniform(2);
  CHECK(code_of([&] { Session s(rn.net.with_cmds(cmds)); }) == ErrorCode::InconsistentNet);
  cmds[2].reset();
  CHECK(code_of([&] { Session s(rn.net.with_cmds(cmds)); }) == ErrorCode::InvalidNet);
}

TEST_CASE("GBI posteriors match brute-force conditioning on random tree nets") {
  std::mt19937_64 rng(54);
  int checked = 0;
  int impossible = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto rn = testing::random_tree_net(rng);
    const Session prior(rn.net);
    std::vector<VarId> all(rn.var_count);
    std::iota(all.begin(), all.end(), VarId{0});
    std::shuffle(all.begin(), all.end(), rng);
    const std::vector<VarId> evidence(all.begin(), all.begin() + 1 + rng() % std::min(3, rn.var_count));
    for (std::uint32_t bits = 0; bits < (1U << evidence.size()); ++bits) {
      const auto conditioned = testing::condition_joint(rn.joint, global_assignment(evidence, bits));
      const auto batch = assertions_for(evidence, bits);
      if (conditioned.empty()) {
        CHECK(code_of([&] { assert_evidence(prior, batch); }) == ErrorCode::ImpossibleEvidence);
        ++impossible;
        continue;
      }
      const Session post = assert_evidence(prior, batch);
      CHECK(oracle_gap(post, conditioned) < 1e-9);
      CHECK(check_consistency(post.current()).max_discrepancy() < 1e-9);
      for (const auto& leg : post.current().legs()) {
        const auto& a = leg.cmd->atoms();
        CHECK(std::abs(std::accumulate(a.begin(), a.end(), 0.0) - 1.0) < 1e-9);
      }
      ++checked;
    }
  }
  CHECK(checked > 100);
  MESSAGE("assignments checked: " << checked << ", impossible: " << impossible);
}

TEST_CASE("trace steps record multipliers, and zero atoms stay zero") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rn = testing::random_tree_net(rng, {10, 4, 0.3});
    const Session prior(rn.net);
    Session post = prior;
    try {
      const EvidenceAssertion e{static_cast<VarId>(rng() % rn.var_count), (rng() & 1) != 0};
      post = assert_evidence(prior, std::span(&e, 1));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ImpossibleEvidence);
      continue;
    }
    // Replay the trace from the prior CMDs.
    std::vector<std::vector<double>> cmds;
    for (const auto& l : prior.current().legs()) cmds.emplace_back(l.cmd->atoms().begin(), l.cmd->atoms().end());
    for (const auto& step : post.trace()) {
      auto& t = cmds[step.target];
      REQUIRE(step.multipliers.size() == t.size());
      for (std::size_t a = 0; a < t.size(); ++a) {
        const double next = t[a] * step.multipliers[a];
        if (t[a] == 0.0) CHECK(next == 0.0);
        t[a] = next;
      }
      CHECK_FALSE(step.drift_warning);
    }
    for (LegId l = 0; l < cmds.size(); ++l) {
      CHECK(max_abs_diff(cmds[l], post.cmd(l).atoms()) < 1e-12);
    }
    CHECK(post.trace().front().kind == StepKind::Conditioning);
    CHECK(post.trace().size() == rn.net.legs().size());
  }
}

TEST_CASE("evidence order does not matter") {
  std::mt19937_64 rng(56);
  int compared = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto rn = testing::random_tree_net(rng);
    if (rn.var_count < 3) continue;
    const Session prior(rn.net);
    std::vector<EvidenceAssertion> ev;
    for (int k = 0; k < 3; ++k) ev.push_back({static_cast<VarId>(k), (rng() & 1) != 0});
    if (testing::condition_joint(rn.joint, global_assignment({0, 1, 2}, (ev[0].observed ? 1 : 0) |
                                                                            (ev[1].observed ? 2 : 0) |
                                                                            (ev[2].observed ? 4 : 0)))
            .empty()) {
      continue;
    }
    std::vector<std::size_t> order{0, 1, 2};
    std::vector<double> reference;
    do {
      Session s = prior;
      for (std::size_t i : order) s = assert_evidence(s, std::span(&ev[i], 1));
      std::vector<double> marginals;
      for (const auto& m : all_marginals(s)) marginals.push_back(m.marginal);
      if (reference.empty()) {
        reference = marginals;
      } else {
        CHECK(max_abs_diff(marginals, reference) < 1e-6);
      }
      CHECK(check_consistency(s.current()).max_discrepancy() < 1e-9);
    } while (std::next_permutation(order.begin(), order.end()));
    ++compared;
  }
  CHECK(compared > 10);
}

TEST_CASE("re-assertion is idempotent; opposite value conflicts") {
  std::mt19937_64 rng(57);
  const auto rn = testing::random_star_net(rng, 2);
  const Session prior(rn.net);
  const EvidenceAssertion yes{0, true};
  const EvidenceAssertion no{0, false};
  const Session once = assert_evidence(prior, std::span(&yes, 1));
  const Session twice = assert_evidence(once, std::span(&yes, 1));
  CHECK(twice.trace().size() == once.trace().size());
  CHECK(twice.evidence().size() == 1);
  CHECK(twice.current().legs()[1].cmd == once.current().legs()[1].cmd);
  CHECK(code_of([&] { assert_evidence(once, std::span(&no, 1)); }) == ErrorCode::ConflictingEvidence);
  const std::vector<EvidenceAssertion> both{yes, no};
  CHECK(code_of([&] { assert_evidence(prior, both); }) == ErrorCode::ConflictingEvidence);
  CHECK(once.evidence().front().sequence == 1);
  CHECK(prior.evidence().empty());
}

TEST_CASE("already implied evidence changes nothing") {
  std::vector<Variable> vars{{"e", VarKind::Evidence, true}, {"h", VarKind::Hypothesis, false},
                             {"g", VarKind::Goal, false}};
  // Pr(e) = 1 in A.
  const LegNet net(vars, {{"A", {0, 1}, Cmd({0, 0.3, 0, 0.7})}, {"B", {1, 2}, Cmd({0.1, 0.3, 0.2, 0.4})}}, {});
  const Session prior(net);
  const EvidenceAssertion e{0, true};
  const Session post = assert_evidence(prior, std::span(&e, 1));
  for (LegId l = 0; l < 2; ++l) CHECK(max_abs_diff(post.cmd(l).atoms(), prior.cmd(l).atoms()) < 1e-12);
  for (const auto& step : post.trace()) {
    for (std::size_t a = 0; a < step.multipliers.size(); ++a) {
      const double before = (step.target == 0 ? prior.cmd(0) : prior.cmd(1))[static_cast<AtomIndex>(a)];
      if (before > 0.0) CHECK(step.multipliers[a] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("only binary evidence variables can be asserted") {
  std::vector<Variable> vars{{"e", VarKind::Evidence, true}, {"h", VarKind::Hypothesis, false}};
  const LegNet net(vars, {{"A", {0, 1}, Cmd({0.1, 0.2, 0.3, 0.4})}}, {});
  const Session s(net);
  const EvidenceAssertion bad{1, true};
  CHECK(code_of([&] { assert_evidence(s, std::span(&bad, 1)); }) == ErrorCode::NotEvidenceVariable);
  const EvidenceAssertion unknown{9, true};
  CHECK(code_of([&] { assert_evidence(s, std::span(&unknown, 1)); }) == ErrorCode::UnknownVariable);
  const Session g = assert_evidence(s, std::span<const EvidenceAssertion>{});
  CHECK(g.trace().empty());
}

TEST_CASE("a leaf origin in a two-LEG net takes one propagation step") {
  std::mt19937_64 rng(58);
  const auto rn = testing::random_star_net(rng, 1);
  const Session s(rn.net);
  const Session p = propagate(s, 1, condition(s.cmd(1), Assignment{1, 1}));
  REQUIRE(p.trace().size() == 1);
  CHECK(p.trace()[0].target == 0);
  CHECK(p.trace()[0].source == LegId{1});
}

TEST_CASE("star nets give the same result for every leaf order") {
  std::mt19937_64 rng(59);
  const auto rn = testing::random_star_net(rng, 4);
  const Session base(rn.net);
  const Cmd centre_post = condition(base.cmd(0), Assignment{0b10000, 0b10000});
  const Session ref = propagate(base, 0, centre_post);
  REQUIRE(ref.trace().size() == 4);

  std::vector<std::size_t> order{1, 2, 3, 4};
  int perms = 0;
  do {
    // Same net with the leaves declared in a different order.
    std::vector<Leg> legs{rn.net.leg(0)};
    for (std::size_t i : order) legs.push_back(rn.net.leg(i));
    const LegNet permuted(rn.net.variables(), legs, {});
    const Session p = propagate(Session(permuted), 0, centre_post);
    CHECK(p.trace().size() == 4);
    for (std::size_t k = 0; k < order.size(); ++k) {
      CHECK(max_abs_diff(p.cmd(k + 1).atoms(), ref.cmd(order[k]).atoms()) <= 1e-15);
    }
    ++perms;
  } while (std::next_permutation(order.begin(), order.end()));
  CHECK(perms == 24);
}

TEST_CASE("evidence ranking and goal report") {
  std::vector<Variable> vars{{"b", VarKind::Evidence, true},
                             {"a", VarKind::Evidence, true},
                             {"c", VarKind::Evidence, true},
                             {"g", VarKind::Goal, false}};
  // bits: b, a, g; then c, g in B.  Pr(b) = Pr(a) = 0.5.
  std::vector<double> A = {0.1, 0.1, 0.1, 0.2, 0.2, 0.1, 0.1, 0.1};
  const Cmd ca(A);
  const double pg = marginal(ca, 2);
  const Cmd cb({0.7 * (1 - pg), 0.3 * (1 - pg), 0.2 * pg, 0.8 * pg});
  const LegNet net(vars, {{"A", {0, 1, 3}, ca}, {"B", {2, 3}, cb}}, {});
  const Session s(net);
  auto r = rank_evidence(s, RankDirection::MostLikely);
  REQUIRE(r.size() == 3);
  CHECK(net.variable(r[0].variable).name == "c");
  CHECK(net.variable(r[1].variable).name == "a");  // tie with b, by name
  CHECK(net.variable(r[2].variable).name == "b");
  r = rank_evidence(s, RankDirection::LeastLikely);
  CHECK(net.variable(r[0].variable).name == "a");
  CHECK(net.variable(r[2].variable).name == "c");

  const EvidenceAssertion e{0, true};
  const Session t = assert_evidence(s, std::span(&e, 1));
  r = rank_evidence(t, RankDirection::MostLikely);
  REQUIRE(r.size() == 2);
  const double want_a = marginal(condition(ca, Assignment{1, 1}), 1);
  for (const auto& x : r) {
    if (x.variable == 1) CHECK(x.marginal == doctest::Approx(want_a).epsilon(1e-12));
  }

  const auto goals = goal_report(t);
  REQUIRE(goals.size() == 1);
  CHECK(goals[0].variable == 3);
  CHECK(goals[0].marginal == doctest::Approx(marginal(condition(ca, Assignment{1, 1}), 2)).epsilon(1e-12));

  const std::vector<EvidenceAssertion> rest{{1, true}, {2, false}};
  const Session all = assert_evidence(t, rest);
  CHECK(rank_evidence(all, RankDirection::MostLikely).empty());
}
