#include "gbi/kb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gbi/error.hpp"
#include "json.hpp"

namespace gbi::kb {

using json = nlohmann::ordered_json;

namespace {

// Walks one JSON object, remembering which members were read so that
// leftovers can be rejected.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error::schema(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string at(const char* key) const { return path_ + "." + key; }

  const json& required(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) throw Error::schema(at(key), "missing field");
    return *it;
  }

  const json* optional(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw Error::schema(path_ + "." + key, "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw Error::schema(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw Error::schema(path, "expected true or false");
  return j.get<bool>();
}

long long as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw Error::schema(path, "expected an integer");
  return j.get<long long>();
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw Error::schema(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error::schema(path, "expected a finite number");
  return v;
}

double as_probability(const json& j, const std::string& path) {
  const double v = as_number(j, path);
  if (v < 0.0 || v > 1.0) throw Error::schema(path, "probability must lie in [0, 1]");
  return v;
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw Error::schema(path, "expected an array");
  return j;
}

std::vector<std::string> as_names(const json& j, const std::string& path) {
  std::vector<std::string> out;
  const json& a = as_array(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_string(a[i], index_path(path, i)));
  return out;
}

std::vector<double> as_numbers(const json& j, const std::string& path) {
  std::vector<double> out;
  const json& a = as_array(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_number(a[i], index_path(path, i)));
  return out;
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error::schema("$", "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

void check_version(Fields& f) {
  const auto v = as_int(f.required("format_version"), f.at("format_version"));
  if (v != kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                "format_version " + std::to_string(v) + " is not supported (expected " +
                    std::to_string(kFormatVersion) + ")");
  }
}

VarMask mask_of(const std::vector<std::string>& leg_vars, const std::vector<std::string>& names,
                const std::string& path) {
  VarMask m = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto it = std::find(leg_vars.begin(), leg_vars.end(), names[i]);
    if (it == leg_vars.end()) {
      throw Error::schema(index_path(path, i), "'" + names[i] + "' is not a variable of this LEG");
    }
    const VarMask bit = VarMask{1} << (it - leg_vars.begin());
    if (m & bit) throw Error::schema(index_path(path, i), "'" + names[i] + "' listed twice");
    m |= bit;
  }
  if (m == 0) throw Error::schema(path, "key must name at least one variable");
  return m;
}

std::vector<std::string> names_of(const std::vector<std::string>& leg_vars, VarMask m) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < leg_vars.size(); ++k) {
    if ((m >> k) & 1U) out.push_back(leg_vars[k]);
  }
  return out;
}

ConstraintRecord parse_record(const json& j, const std::string& path,
                              const std::vector<std::string>& leg_vars) {
  Fields f(j, path);
  ConstraintRecord r;
  r.key = mask_of(leg_vars, as_names(f.required("key"), f.at("key")), f.at("key"));
  r.value = as_probability(f.required("value"), f.at("value"));
  const auto source = as_string(f.required("source"), f.at("source"));
  const auto parsed = parse_constraint_source(source);
  if (!parsed) throw Error::schema(f.at("source"), "unknown source '" + source + "'");
  r.source = *parsed;
  if (const json* given = f.optional("given")) {
    r.form = EntryForm::Conditional;
    r.given = mask_of(leg_vars, as_names(*given, f.at("given")), f.at("given"));
    if ((r.given & ~r.key) != 0 || r.given == r.key) {
      throw Error::schema(f.at("given"), "must be a proper subset of the key");
    }
    r.conditional_value =
        as_probability(f.required("conditional_value"), f.at("conditional_value"));
  } else if (f.optional("conditional_value")) {
    throw Error::schema(f.at("conditional_value"), "only allowed together with 'given'");
  }
  f.finish();
  return r;
}

json record_json(const ConstraintRecord& r, const std::vector<std::string>& leg_vars) {
  json j;
  j["key"] = names_of(leg_vars, r.key);
  j["value"] = r.value;
  j["source"] = std::string(to_string(r.source));
  if (r.form == EntryForm::Conditional) {
    j["given"] = names_of(leg_vars, r.given);
    j["conditional_value"] = r.conditional_value;
  }
  return j;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

KbDocument parse_kb(std::string_view text) {
  const json root = parse_text(text);
  Fields f(root, "$");
  check_version(f);
  KbDocument doc;
  doc.name = as_string(f.required("name"), f.at("name"));
  if (const json* d = f.optional("description")) doc.description = as_string(*d, f.at("description"));
  if (const json* m = f.optional("max_leg_vars")) {
    const auto v = as_int(*m, f.at("max_leg_vars"));
    if (v < 1 || v > kHardMaxVars) {
      throw Error::schema(f.at("max_leg_vars"), "must lie in [1, " + std::to_string(kHardMaxVars) + "]");
    }
    doc.max_leg_vars = static_cast<int>(v);
  }

  std::set<std::string> declared;
  const std::string vpath = f.at("variables");
  const json& vars = as_array(f.required("variables"), vpath);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    Fields v(vars[i], index_path(vpath, i));
    VariableRecord r;
    r.name = as_string(v.required("name"), v.at("name"));
    if (r.name.empty()) throw Error::schema(v.at("name"), "name must be nonempty");
    if (!declared.insert(r.name).second) throw Error::schema(v.at("name"), "duplicate variable '" + r.name + "'");
    const auto kind = as_string(v.required("kind"), v.at("kind"));
    const auto k = parse_var_kind(kind);
    if (!k) throw Error::schema(v.at("kind"), "unknown kind '" + kind + "'");
    r.kind = *k;
    if (const json* b = v.optional("bev")) r.bev = as_bool(*b, v.at("bev"));
    if (r.bev && r.kind != VarKind::Evidence) {
      throw Error::schema(v.at("bev"), "only evidence variables can be BEVs");
    }
    v.finish();
    doc.variables.push_back(std::move(r));
  }

  auto known = [&](const std::string& name, const std::string& path) {
    if (!declared.contains(name)) throw Error::schema(path, "unknown variable '" + name + "'");
    return name;
  };

  if (const json* rels = f.optional("relations")) {
    const std::string rpath = f.at("relations");
    as_array(*rels, rpath);
    for (std::size_t i = 0; i < rels->size(); ++i) {
      Fields r(rels->at(i), index_path(rpath, i));
      RelationRecord rec;
      const auto kind = as_string(r.required("kind"), r.at("kind"));
      if (kind == "forbidden") {
        rec.kind = RelationKind::Forbidden;
        const auto names = as_names(r.required("variables"), r.at("variables"));
        if (names.size() != 2) throw Error::schema(r.at("variables"), "expected two variables");
        rec.first = known(names[0], index_path(r.at("variables"), 0));
        rec.second = known(names[1], index_path(r.at("variables"), 1));
      } else if (kind == "cutoff") {
        rec.kind = RelationKind::Cutoff;
        rec.first = known(as_string(r.required("dependent"), r.at("dependent")), r.at("dependent"));
        rec.second =
            known(as_string(r.required("prerequisite"), r.at("prerequisite")), r.at("prerequisite"));
      } else {
        throw Error::schema(r.at("kind"), "unknown relation kind '" + kind + "'");
      }
      r.finish();
      doc.relations.push_back(std::move(rec));
    }
  }

  const std::string lpath = f.at("legs");
  const json& legs = as_array(f.required("legs"), lpath);
  std::set<std::string> leg_names;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    Fields l(legs[i], index_path(lpath, i));
    LegRecord rec;
    rec.name = as_string(l.required("name"), l.at("name"));
    if (!leg_names.insert(rec.name).second) throw Error::schema(l.at("name"), "duplicate LEG '" + rec.name + "'");
    rec.variables = as_names(l.required("variables"), l.at("variables"));
    if (rec.variables.empty() || static_cast<int>(rec.variables.size()) > kHardMaxVars) {
      throw Error::schema(l.at("variables"),
                          "a LEG needs 1 to " + std::to_string(kHardMaxVars) + " variables");
    }
    for (std::size_t k = 0; k < rec.variables.size(); ++k) {
      known(rec.variables[k], index_path(l.at("variables"), k));
    }
    if (const json* d = l.optional("default_order")) {
      const auto v = as_int(*d, l.at("default_order"));
      if (v < 0) throw Error::schema(l.at("default_order"), "must be nonnegative");
      rec.default_order = static_cast<int>(v);
    }
    if (const json* cs = l.optional("constraints")) {
      const std::string cpath = l.at("constraints");
      as_array(*cs, cpath);
      for (std::size_t c = 0; c < cs->size(); ++c) {
        rec.constraints.push_back(parse_record(cs->at(c), index_path(cpath, c), rec.variables));
      }
    }
    if (const json* cmd = l.optional("cmd")) {
      auto atoms = as_numbers(*cmd, l.at("cmd"));
      if (atoms.size() != (std::size_t{1} << rec.variables.size())) {
        throw Error::schema(l.at("cmd"), "expected 2^" + std::to_string(rec.variables.size()) + " entries");
      }
      for (std::size_t a = 0; a < atoms.size(); ++a) as_probability(cmd->at(a), index_path(l.at("cmd"), a));
      rec.cmd = std::move(atoms);
    }
    l.finish();
    doc.legs.push_back(std::move(rec));
  }
  f.finish();
  return doc;
}

std::string serialize(const KbDocument& doc) {
  json root;
  root["format_version"] = doc.format_version;
  root["name"] = doc.name;
  root["description"] = doc.description;
  root["max_leg_vars"] = doc.max_leg_vars;
  root["variables"] = json::array();
  for (const auto& v : doc.variables) {
    json j;
    j["name"] = v.name;
    j["kind"] = std::string(to_string(v.kind));
    j["bev"] = v.bev;
    root["variables"].push_back(std::move(j));
  }
  root["relations"] = json::array();
  for (const auto& r : doc.relations) {
    json j;
    if (r.kind == RelationKind::Forbidden) {
      j["kind"] = "forbidden";
      j["variables"] = {r.first, r.second};
    } else {
      j["kind"] = "cutoff";
      j["dependent"] = r.first;
      j["prerequisite"] = r.second;
    }
    root["relations"].push_back(std::move(j));
  }
  root["legs"] = json::array();
  for (const auto& l : doc.legs) {
    json j;
    j["name"] = l.name;
    j["variables"] = l.variables;
    if (l.default_order) j["default_order"] = *l.default_order;
    j["constraints"] = json::array();
    for (const auto& r : l.constraints) j["constraints"].push_back(record_json(r, l.variables));
    if (l.cmd) j["cmd"] = *l.cmd;
    root["legs"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

KbDocument load_kb(const std::string& path) { return parse_kb(slurp(path)); }

void save_text(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::NotFound, "cannot write '" + tmp + "'");
    out << text;
    if (!out) throw Error(ErrorCode::NotFound, "failed writing '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error(ErrorCode::NotFound, "cannot replace '" + path + "'");
  }
}

LegNet structure_of(const KbDocument& doc) {
  std::map<std::string, VarId> ids;
  std::vector<Variable> vars;
  for (const auto& v : doc.variables) {
    ids.emplace(v.name, vars.size());
    vars.push_back({v.name, v.kind, v.bev});
  }
  auto id = [&](const std::string& name) {
    const auto it = ids.find(name);
    if (it == ids.end()) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + name + "'");
    return it->second;
  };
  std::vector<Leg> legs;
  for (const auto& l : doc.legs) {
    Leg leg{l.name, {}, std::nullopt};
    for (const auto& n : l.variables) leg.vars.push_back(id(n));
    legs.push_back(std::move(leg));
  }
  std::vector<StructuralRelation> rels;
  for (const auto& r : doc.relations) rels.push_back({r.kind, id(r.first), id(r.second)});
  return LegNet(std::move(vars), std::move(legs), std::move(rels), NetConfig{doc.max_leg_vars});
}

ElicitationState leg_state(const KbDocument& doc, LegId leg) {
  const LegNet net = structure_of(doc);
  return ElicitationState::replay(shape_of(net, leg), doc.legs.at(leg).constraints);
}

KbDocument with_leg_state(const KbDocument& doc, LegId leg, const ElicitationState& state) {
  KbDocument next = doc;
  next.legs.at(leg).constraints = state.all_records();
  next.legs.at(leg).cmd.reset();
  return next;
}

namespace {

Cmd rebuild(const KbDocument& doc, const LegNet& net, LegId l, std::optional<int> order) {
  const LegRecord& rec = doc.legs[l];
  try {
    const auto state = ElicitationState::replay(shape_of(net, l), rec.constraints);
    return build_cmd(state, DefaultPolicy{order ? order : rec.default_order});
  } catch (const Error& e) {
    throw Error(e.code(), "LEG '" + rec.name + "': " + e.what());
  }
}

}  // namespace

KbDocument build(const KbDocument& doc, const BuildOptions& options) {
  const LegNet net = structure_of(doc);
  KbDocument out = doc;
  for (LegId l = 0; l < doc.legs.size(); ++l) {
    const Cmd c = rebuild(doc, net, l, options.max_order);
    out.legs[l].cmd = std::vector<double>(c.atoms().begin(), c.atoms().end());
  }
  return out;
}

LegNet load_net(const KbDocument& doc, bool strict) {
  const LegNet net = structure_of(doc);
  std::vector<std::optional<Cmd>> cmds;
  for (LegId l = 0; l < doc.legs.size(); ++l) {
    const auto& cache = doc.legs[l].cmd;
    if (!cache) {
      cmds.emplace_back(rebuild(doc, net, l, std::nullopt));
      continue;
    }
    const std::string path = "$.legs[" + std::to_string(l) + "].cmd";
    std::optional<Cmd> cached;
    try {
      cached.emplace(*cache, doc.max_leg_vars);
    } catch (const Error& e) {
      throw Error::schema(path, e.what());
    }
    if (strict) {
      const Cmd fresh = rebuild(doc, net, l, std::nullopt);
      const double gap = max_abs_diff(fresh.atoms(), cached->atoms());
      if (gap > tol::kStructural) {
        throw Error::schema(path, "cached CMD differs from its rebuild by " + std::to_string(gap));
      }
    }
    cmds.push_back(std::move(cached));
  }
  return net.with_cmds(std::move(cmds));
}

std::vector<VariableSummary> summarize(const Session& session) {
  std::vector<VariableSummary> out;
  for (const auto& m : all_marginals(session)) {
    const Variable& v = session.current().variable(m.variable);
    out.push_back({v.name, v.kind, m.marginal, session.observed(m.variable)});
  }
  return out;
}

SessionDocument session_document(const std::string& kb_ref, const Session& session) {
  const LegNet& net = session.current();
  SessionDocument doc;
  doc.kb = kb_ref;
  for (const auto& e : session.evidence()) {
    doc.evidence.push_back({net.variable(e.variable).name, e.observed, e.sequence});
  }
  for (const auto& s : session.trace()) {
    SessionDocument::Step step;
    step.kind = s.kind == StepKind::Conditioning ? "conditioning" : "propagation";
    step.target = net.leg(s.target).name;
    if (s.source) step.source = net.leg(*s.source).name;
    for (VarId v : s.shared) step.shared.push_back(net.variable(v).name);
    step.prior_marginal = s.prior_marginal;
    step.posterior_marginal = s.posterior_marginal;
    step.multipliers = s.multipliers;
    step.drift = s.drift;
    step.drift_warning = s.drift_warning;
    doc.trace.push_back(std::move(step));
  }
  for (const auto& m : all_marginals(session)) {
    doc.marginals.push_back({net.variable(m.variable).name, m.marginal});
  }
  return doc;
}

SessionDocument parse_session(std::string_view text) {
  const json root = parse_text(text);
  Fields f(root, "$");
  check_version(f);
  SessionDocument doc;
  doc.kb = as_string(f.required("kb"), f.at("kb"));

  const std::string epath = f.at("evidence");
  const json& ev = as_array(f.required("evidence"), epath);
  for (std::size_t i = 0; i < ev.size(); ++i) {
    Fields e(ev[i], index_path(epath, i));
    SessionDocument::Evidence rec;
    rec.variable = as_string(e.required("variable"), e.at("variable"));
    rec.observed = as_bool(e.required("observed"), e.at("observed"));
    const auto seq = as_int(e.required("sequence"), e.at("sequence"));
    if (seq < 0) throw Error::schema(e.at("sequence"), "must be nonnegative");
    rec.sequence = static_cast<std::uint64_t>(seq);
    e.finish();
    doc.evidence.push_back(std::move(rec));
  }

  const std::string tpath = f.at("trace");
  const json& tr = as_array(f.required("trace"), tpath);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    Fields s(tr[i], index_path(tpath, i));
    SessionDocument::Step step;
    step.kind = as_string(s.required("kind"), s.at("kind"));
    if (step.kind != "conditioning" && step.kind != "propagation") {
      throw Error::schema(s.at("kind"), "unknown step kind '" + step.kind + "'");
    }
    step.target = as_string(s.required("target"), s.at("target"));
    if (const json* src = s.optional("source")) step.source = as_string(*src, s.at("source"));
    step.shared = as_names(s.required("shared"), s.at("shared"));
    step.prior_marginal = as_numbers(s.required("prior_marginal"), s.at("prior_marginal"));
    step.posterior_marginal = as_numbers(s.required("posterior_marginal"), s.at("posterior_marginal"));
    step.multipliers = as_numbers(s.required("multipliers"), s.at("multipliers"));
    step.drift = as_number(s.required("drift"), s.at("drift"));
    step.drift_warning = as_bool(s.required("drift_warning"), s.at("drift_warning"));
    s.finish();
    doc.trace.push_back(std::move(step));
  }

  const std::string mpath = f.at("marginals");
  const json& ms = as_array(f.required("marginals"), mpath);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    Fields m(ms[i], index_path(mpath, i));
    SessionDocument::Marginal rec;
    rec.variable = as_string(m.required("variable"), m.at("variable"));
    rec.value = as_probability(m.required("value"), m.at("value"));
    m.finish();
    doc.marginals.push_back(std::move(rec));
  }
  f.finish();
  return doc;
}

std::string serialize(const SessionDocument& doc) {
  json root;
  root["format_version"] = doc.format_version;
  root["kb"] = doc.kb;
  root["evidence"] = json::array();
  for (const auto& e : doc.evidence) {
    json j;
    j["variable"] = e.variable;
    j["observed"] = e.observed;
    j["sequence"] = e.sequence;
    root["evidence"].push_back(std::move(j));
  }
  root["trace"] = json::array();
  for (const auto& s : doc.trace) {
    json j;
    j["kind"] = s.kind;
    j["target"] = s.target;
    j["source"] = s.source ? json(*s.source) : json(nullptr);
    j["shared"] = s.shared;
    j["prior_marginal"] = s.prior_marginal;
    j["posterior_marginal"] = s.posterior_marginal;
    j["multipliers"] = s.multipliers;
    j["drift"] = s.drift;
    j["drift_warning"] = s.drift_warning;
    root["trace"].push_back(std::move(j));
  }
  root["marginals"] = json::array();
  for (const auto& m : doc.marginals) {
    json j;
    j["variable"] = m.variable;
    j["value"] = m.value;
    root["marginals"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

Session replay(const LegNet& prior, const SessionDocument& doc) {
  auto evidence = doc.evidence;
  std::stable_sort(evidence.begin(), evidence.end(),
                   [](const auto& a, const auto& b) { return a.sequence < b.sequence; });
  Session s(prior);
  for (const auto& e : evidence) {
    const EvidenceAssertion a{prior.variable_id(e.variable), e.observed, 0};
    s = assert_evidence(s, std::span(&a, 1));
  }
  return s;
}

double replay_gap(const LegNet& prior, const SessionDocument& doc) {
  const Session s = replay(prior, doc);
  double gap = 0.0;
  for (const auto& m : doc.marginals) {
    gap = std::max(gap, std::abs(s.marginal(prior.variable_id(m.variable)) - m.value));
  }
  return gap;
}

std::vector<EvidenceAssertion> parse_evidence_list(const LegNet& net, std::string_view text) {
  std::vector<EvidenceAssertion> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, end - start);
    start = end + 1;
    if (item.empty()) continue;
    const std::size_t eq = item.rfind('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidArgument,
                  "evidence '" + std::string(item) + "' is not of the form name=true|false");
    }
    const std::string_view value = item.substr(eq + 1);
    bool observed;
    if (value == "true" || value == "1" || value == "yes") {
      observed = true;
    } else if (value == "false" || value == "0" || value == "no") {
      observed = false;
    } else {
      throw Error(ErrorCode::InvalidArgument, "evidence value '" + std::string(value) + "' must be true or false");
    }
    out.push_back({net.variable_id(item.substr(0, eq)), observed, 0});
  }
  return out;
}

std::vector<std::string> key_names(const LegNet& net, LegId leg, VarMask key) {
  std::vector<std::string> out;
  const Leg& l = net.leg(leg);
  for (std::size_t k = 0; k < l.vars.size(); ++k) {
    if ((key >> k) & 1U) out.push_back(net.variable(l.vars[k]).name);
  }
  return out;
}

VarMask key_from_names(const LegNet& net, LegId leg, const std::vector<std::string>& names) {
  const Leg& l = net.leg(leg);
  VarMask m = 0;
  for (const auto& n : names) {
    const int pos = l.position_of(net.variable_id(n));
    if (pos < 0) {
      throw Error(ErrorCode::UnknownVariable, "'" + n + "' is not a variable of LEG '" + l.name + "'");
    }
    m |= VarMask{1} << pos;
  }
  return m;
}

}  // namespace gbi::kb
