// Command-line front end: validate, build, elicit, infer, trace, serve.

#include <cstdio>
#include <cstring>
#include <fstream>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "gbi/error.hpp"
#include "gbi/kb.hpp"
#include "gbi/service.hpp"
#include "json.hpp"

namespace {

using namespace gbi;

void print_error(const Error& e) {
  nlohmann::ordered_json err;
  err["code"] = std::string(to_string(e.code()));
  err["message"] = e.what();
  if (e.interval()) err["interval"] = {{"lo", e.interval()->lo}, {"hi", e.interval()->hi}};
  if (!e.path().empty()) err["path"] = e.path();
  std::cerr << nlohmann::ordered_json{{"error", err}}.dump() << "\n";
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  // Round-off below the printed precision should not show up as "-0.0000".
  if (buf[0] == '-' && std::strspn(buf + 1, "0.") == std::strlen(buf + 1)) return buf + 1;
  return buf;
}

std::string atom_bits(AtomIndex a, int m) {
  std::string s;
  for (int k = m - 1; k >= 0; --k) s += ((a >> k) & 1U) ? '1' : '0';
  return s;
}

std::string key_text(const LegNet& net, LegId leg, VarMask key) {
  std::string s;
  for (const auto& n : kb::key_names(net, leg, key)) s += (s.empty() ? "" : " & ") + n;
  return s;
}

int cmd_validate(const std::string& path) {
  const auto doc = kb::load_kb(path);
  const LegNet net = kb::structure_of(doc);
  const auto report = validate(net);
  for (const auto& v : report.violations) std::cout << to_string(v.kind) << ": " << v.message << "\n";
  bool clean = report.ok();
  for (LegId l = 0; l < doc.legs.size(); ++l) {
    try {
      const auto state = kb::leg_state(doc, l);
      if (!state.accepted().empty()) state.feasible_support();
    } catch (const Error& e) {
      std::cout << "LEG " << doc.legs[l].name << ": " << to_string(e.code()) << ": " << e.what() << "\n";
      clean = false;
    }
  }
  if (!clean) {
    const std::string first = report.ok() ? "infeasible constraints"
                                          : std::string(to_string(report.violations.front().kind));
    throw Error(ErrorCode::InvalidNet, "validation failed: " + first);
  }
  std::cout << "ok: " << net.variables().size() << " variables, " << net.legs().size() << " LEGs, "
            << net.intersections().size() << " intersections\n";
  return 0;
}

int cmd_build(const std::string& path, std::optional<int> max_order, const std::string& output) {
  const auto built = kb::build(kb::load_kb(path), kb::BuildOptions{max_order});
  kb::save_text(output.empty() ? path : output, kb::serialize(built));
  const LegNet net = kb::load_net(built);
  const auto fp = storage_footprint(net);
  std::cout << "footprint: cmd_entries=" << fp.cmd_entries
            << " full_joint_entries=" << fp.full_joint_entries << "\n";
  for (LegId l = 0; l < net.legs().size(); ++l) {
    const Leg& leg = net.leg(l);
    std::cout << "LEG " << leg.name << " (";
    for (std::size_t k = leg.vars.size(); k-- > 0;) {
      std::cout << net.variable(leg.vars[k]).name << (k ? ", " : "");
    }
    std::cout << ")\n";
    for (AtomIndex a = 0; a < leg.cmd->size(); ++a) {
      std::cout << "  " << atom_bits(a, static_cast<int>(leg.vars.size())) << " "
                << fixed((*leg.cmd)[a]) << "\n";
    }
  }
  return 0;
}

int cmd_elicit(const std::string& path, const std::string& leg_name, bool restart) {
  auto doc = kb::load_kb(path);
  const LegNet net = kb::structure_of(doc);
  const LegId l = net.leg_id(leg_name);
  if (restart) doc.legs[l].constraints.clear();
  ElicitationState state = kb::leg_state(doc, l);
  auto save = [&] {
    doc = kb::with_leg_state(doc, l, state);
    kb::save_text(path, kb::serialize(doc));
  };
  std::cout << "commands: <joint value> | given <var>[,<var>...] <conditional value> | default | skip | quit\n";
  std::string line;
  while (!state.finished()) {
    const Prompt p = state.prompt();
    std::cout << "Pr(" << key_text(net, l, p.key) << ") range [" << fixed(p.interval.lo) << ", "
              << fixed(p.interval.hi) << "] default " << fixed(p.default_value) << " ("
              << p.remaining << " remaining)\n> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    std::istringstream in(line);
    std::string word;
    in >> word;
    try {
      if (word == "quit" || word == "q") break;
      if (word.empty() || word == "default" || word == "d") {
        state = state.accept_default();
      } else if (word == "skip" || word == "s") {
        state = state.skip();
      } else if (word == "given") {
        std::string vars;
        double value = 0.0;
        if (!(in >> vars >> value)) throw Error(ErrorCode::InvalidArgument, "usage: given <var>[,<var>...] <value>");
        std::vector<std::string> names;
        std::stringstream vs(vars);
        for (std::string n; std::getline(vs, n, ',');) names.push_back(n);
        state = state.accept(ConditionalEntry{kb::key_from_names(net, l, names), value});
      } else {
        std::size_t used = 0;
        double value = 0.0;
        try {
          value = std::stod(word, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != word.size()) throw Error(ErrorCode::InvalidArgument, "unrecognized input '" + word + "'");
        state = state.accept(value);
      }
      save();
    } catch (const Error& e) {
      print_error(e);
    }
  }
  save();
  if (state.finished()) {
    try {
      const Cmd c = build_cmd(state, DefaultPolicy{doc.legs[l].default_order});
      std::cout << "complete; CMD:\n";
      for (AtomIndex a = 0; a < c.size(); ++a) {
        std::cout << "  " << atom_bits(a, c.var_count()) << " " << fixed(c[a]) << "\n";
      }
    } catch (const Error& e) {
      print_error(e);
      return 1;
    }
  } else {
    std::cout << state.remaining() << " constraints left; progress saved\n";
  }
  return 0;
}

int cmd_infer(const std::string& path, const std::string& evidence, const std::string& rank,
              const std::string& session_out, bool strict) {
  const auto doc = kb::load_kb(path);
  const LegNet prior = kb::load_net(doc, strict);
  Session s(prior);
  s = assert_evidence(s, kb::parse_evidence_list(prior, evidence));
  for (const auto& g : goal_report(s)) {
    std::cout << s.current().variable(g.variable).name << " " << fixed(g.marginal) << "\n";
  }
  if (!rank.empty()) {
    const auto dir = rank == "least" ? RankDirection::LeastLikely : RankDirection::MostLikely;
    std::cout << "rank (" << rank << " likely):\n";
    for (const auto& r : rank_evidence(s, dir)) {
      std::cout << "  " << s.current().variable(r.variable).name << " " << fixed(r.marginal) << "\n";
    }
  }
  const double gap = check_consistency(s.current()).max_discrepancy();
  std::cout << "consistency: max discrepancy " << gap << "\n";
  if (!session_out.empty()) kb::save_text(session_out, kb::serialize(kb::session_document(path, s)));
  return 0;
}

int cmd_trace(const std::string& path, bool verify) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const auto doc = kb::parse_session(text.str());
  std::cout << "session over " << doc.kb << "\n";
  for (const auto& e : doc.evidence) {
    std::cout << "evidence #" << e.sequence << " " << e.variable << "=" << (e.observed ? "true" : "false") << "\n";
  }
  for (std::size_t i = 0; i < doc.trace.size(); ++i) {
    const auto& s = doc.trace[i];
    std::cout << "step " << i + 1 << ": " << s.kind << " " << s.target;
    if (s.source) std::cout << " from " << *s.source;
    std::cout << " on {";
    for (std::size_t k = 0; k < s.shared.size(); ++k) std::cout << (k ? ", " : "") << s.shared[k];
    std::cout << "}\n    prior";
    for (double v : s.prior_marginal) std::cout << " " << fixed(v);
    std::cout << "\n    posterior";
    for (double v : s.posterior_marginal) std::cout << " " << fixed(v);
    std::cout << "\n";
    if (s.drift_warning) std::cout << "    warning: mass drift " << s.drift << " before renormalization\n";
  }
  if (verify) {
    const double gap = kb::replay_gap(kb::load_net(kb::load_kb(doc.kb)), doc);
    std::cout << "replay: max marginal difference " << gap << "\n";
    if (gap > tol::kStructural) {
      throw Error(ErrorCode::InconsistentNet, "replayed marginals differ from the recorded ones");
    }
  }
  return 0;
}

int cmd_serve(const std::string& host, int port, const std::string& kb_dir) {
  service::Service svc(kb_dir);
  service::HttpServer server(svc);
  const int bound = server.bind(host, port);
  if (bound < 0) throw Error(ErrorCode::InvalidArgument, "cannot bind " + host + ":" + std::to_string(port));
  std::cout << "listening on http://" << host << ":" << bound << " (kb dir " << kb_dir << ")" << std::endl;
  server.listen();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic inference over LEG nets"};
  app.require_subcommand(1);

  std::string kb_path, leg, evidence, rank, session_out = "session.json", output, host = "127.0.0.1";
  std::optional<int> max_order;
  bool restart = false, strict = false, verify = false;
  int port = 8080;
  const char* env_dir = std::getenv("GBI_KB_DIR");
  std::string kb_dir = env_dir ? env_dir : ".";

  auto* validate_cmd = app.add_subcommand("validate", "check net structure and constraint feasibility");
  validate_cmd->add_option("kb", kb_path, "knowledge base file")->required();

  auto* build_cmd = app.add_subcommand("build", "fill defaults, build every CMD, write the cache");
  build_cmd->add_option("kb", kb_path)->required();
  build_cmd->add_option("--max-order", max_order, "keys above this order may be defaulted");
  build_cmd->add_option("-o,--output", output, "write here instead of in place");

  auto* elicit_cmd = app.add_subcommand("elicit", "enter constraints for one LEG (reads stdin)");
  elicit_cmd->add_option("kb", kb_path)->required();
  elicit_cmd->add_option("--leg", leg, "LEG name")->required();
  elicit_cmd->add_flag("--restart", restart, "discard the LEG's existing records");

  auto* infer_cmd = app.add_subcommand("infer", "assert evidence and report goal marginals");
  infer_cmd->add_option("kb", kb_path)->required();
  infer_cmd->add_option("--evidence", evidence, "name=true,name2=false");
  infer_cmd->add_option("--rank", rank, "rank unasserted evidence")->check(CLI::IsMember({"most", "least"}));
  infer_cmd->add_option("--session-out", session_out, "session file to write ('' to skip)");
  infer_cmd->add_flag("--strict", strict, "verify cached CMDs against a rebuild");

  auto* trace_cmd = app.add_subcommand("trace", "print a session's update steps");
  trace_cmd->add_option("session", kb_path, "session file")->required();
  trace_cmd->add_flag("--verify", verify, "replay the evidence and compare marginals");

  auto* serve_cmd = app.add_subcommand("serve", "start the HTTP API");
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--kb-dir", kb_dir, "directory of *.kb.json files (default $GBI_KB_DIR)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate_cmd) return cmd_validate(kb_path);
    if (*build_cmd) return cmd_build(kb_path, max_order, output);
    if (*elicit_cmd) return cmd_elicit(kb_path, leg, restart);
    if (*infer_cmd) return cmd_infer(kb_path, evidence, rank, session_out, strict);
    if (*trace_cmd) return cmd_trace(kb_path, verify);
    if (*serve_cmd) return cmd_serve(host, port, kb_dir);
  } catch (const Error& e) {
    print_error(e);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::ordered_json{{"error", {{"code", "Internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 0;
}
