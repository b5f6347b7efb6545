#include "gbi/service.hpp"

#include <algorithm>
#include <regex>
#include <vector>

#include "gbi/kb.hpp"
#include "httplib.h"
#include "json.hpp"

namespace gbi::service {

using json = nlohmann::ordered_json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SchemaError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::UnknownVariable:
      return 400;
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::ConflictingEvidence:
    case ErrorCode::NotNextKey:
      return 409;
    case ErrorCode::InvalidDistribution:
    case ErrorCode::ImpossibleEvidence:
    case ErrorCode::InfeasibleConstraintSet:
    case ErrorCode::ConstraintOutOfRange:
    case ErrorCode::ZeroCondition:
    case ErrorCode::UndeterminedCondition:
    case ErrorCode::IncompleteConstraints:
    case ErrorCode::NotEvidenceVariable:
    case ErrorCode::InvalidNet:
    case ErrorCode::InconsistentNet:
      return 422;
  }
  return 500;
}

std::string error_body(const Error& e) {
  json err;
  err["code"] = std::string(to_string(e.code()));
  err["message"] = e.what();
  if (e.interval()) err["interval"] = {{"lo", e.interval()->lo}, {"hi", e.interval()->hi}};
  if (!e.path().empty()) err["path"] = e.path();
  return json{{"error", err}}.dump();
}

namespace {

json parse_body(std::string_view body) {
  if (body.empty()) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw Error::schema("$", "request body must be an object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error::schema("$", "malformed JSON at byte " + std::to_string(e.byte));
  }
}

template <typename T>
T field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error::schema(std::string("$.") + key, "missing field");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error::schema(std::string("$.") + key, "wrong type");
  }
}

void check_name(const std::string& name) {
  static const std::regex ok("[A-Za-z0-9_][A-Za-z0-9_.-]*");
  if (!std::regex_match(name, ok)) {
    throw Error(ErrorCode::InvalidArgument, "invalid KB name '" + name + "'");
  }
}

json prompt_json(const LegNet& net, LegId leg, const ElicitationState& s) {
  json j;
  j["leg"] = net.leg(leg).name;
  j["finished"] = s.finished();
  j["remaining"] = s.remaining();
  j["total"] = s.sequence().size();
  if (!s.finished()) {
    const Prompt p = s.prompt();
    j["key"] = kb::key_names(net, leg, p.key);
    j["interval"] = {{"lo", p.interval.lo}, {"hi", p.interval.hi}};
    j["default"] = p.default_value;
  }
  return j;
}

json summary_json(const Session& s) {
  json out = json::array();
  for (const auto& v : kb::summarize(s)) {
    json j;
    j["variable"] = v.name;
    j["kind"] = std::string(to_string(v.kind));
    j["marginal"] = v.marginal;
    j["observed"] = v.observed ? json(*v.observed) : json(nullptr);
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const std::size_t j = std::min(path.find('/', i), path.size());
    if (j > i) parts.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

}  // namespace

std::shared_ptr<const Session> Service::SessionSlot::current() const {
  std::lock_guard lock(snapshot_mutex);
  return snapshot;
}

Service::Service(std::filesystem::path kb_dir) : kb_dir_(std::move(kb_dir)) {}

std::shared_ptr<std::shared_mutex> Service::kb_lock(const std::string& name) {
  std::lock_guard lock(registry_mutex_);
  auto& slot = kb_locks_[name];
  if (!slot) slot = std::make_shared<std::shared_mutex>();
  return slot;
}

std::shared_ptr<Service::SessionSlot> Service::session(const std::string& id) {
  std::lock_guard lock(registry_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "no session '" + id + "'");
  return it->second;
}

std::filesystem::path Service::kb_path(const std::string& name) const {
  check_name(name);
  return kb_dir_ / (name + ".kb.json");
}

Response Service::handle(std::string_view method, std::string_view path, std::string_view body,
                         const std::map<std::string, std::string>& query) {
  const auto p = split_path(path);
  const auto n = p.size();
  auto is = [&](std::string_view m) { return method == m; };
  try {
    if (n >= 1 && p[0] == "kbs") {
      if (n == 1 && is("GET")) return {200, list_kbs()};
      if (n == 2 && is("GET")) return {200, fetch_kb(p[1])};
      if (n == 2 && is("PUT")) return {200, store_kb(p[1], body)};
      if (n == 3 && p[2] == "build" && is("POST")) return {200, build_kb(p[1], body)};
      if (n == 5 && p[2] == "legs") {
        if (p[4] == "next-constraint" && is("GET")) return {200, next_constraint(p[1], p[3])};
        if (p[4] == "accept-constraint" && is("POST")) return {200, accept_constraint(p[1], p[3], body)};
        if (p[4] == "reset" && is("POST")) return {200, reset_leg(p[1], p[3])};
      }
    } else if (n >= 1 && p[0] == "sessions") {
      if (n == 1 && is("POST")) return {201, create_session(body)};
      if (n == 2 && is("GET")) return {200, session_document(p[1])};
      if (n == 3) {
        if (p[2] == "assert-evidence" && is("POST")) return {200, assert_evidence(p[1], body)};
        if (p[2] == "marginals" && is("GET")) return {200, marginals(p[1])};
        if (p[2] == "rank-evidence" && is("GET")) {
          const auto d = query.find("direction");
          return {200, rank_evidence(p[1], d == query.end() ? "most" : d->second)};
        }
        if (p[2] == "trace" && is("GET")) return {200, trace(p[1])};
        if (p[2] == "consistency" && is("GET")) return {200, consistency(p[1])};
      }
    }
    return {404, error_body(Error(ErrorCode::NotFound, "no route for " + std::string(method) + " " +
                                                           std::string(path)))};
  } catch (const Error& e) {
    return {http_status(e.code()), error_body(e)};
  } catch (const std::exception& e) {
    return {500, json{{"error", {{"code", "Internal"}, {"message", e.what()}}}}.dump()};
  }
}

std::string Service::list_kbs() {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(kb_dir_, ec)) {
    const std::string f = entry.path().filename().string();
    constexpr std::string_view suffix = ".kb.json";
    if (f.size() > suffix.size() && f.ends_with(suffix)) names.push_back(f.substr(0, f.size() - suffix.size()));
  }
  std::sort(names.begin(), names.end());
  return json{{"kbs", names}}.dump();
}

std::string Service::fetch_kb(const std::string& name) {
  const auto path = kb_path(name);
  auto lock = kb_lock(name);
  std::shared_lock read(*lock);
  return kb::serialize(kb::load_kb(path.string()));
}

std::string Service::store_kb(const std::string& name, std::string_view body) {
  const auto path = kb_path(name);
  const kb::KbDocument doc = kb::parse_kb(body);
  kb::structure_of(doc);  // reject structurally invalid nets up front
  auto lock = kb_lock(name);
  std::unique_lock write(*lock);
  kb::save_text(path.string(), kb::serialize(doc));
  return json{{"stored", name}}.dump();
}

std::string Service::next_constraint(const std::string& kb_name, const std::string& leg) {
  const auto path = kb_path(kb_name);
  auto lock = kb_lock(kb_name);
  std::shared_lock read(*lock);
  const auto doc = kb::load_kb(path.string());
  const LegNet net = kb::structure_of(doc);
  const LegId l = net.leg_id(leg);
  return prompt_json(net, l, kb::leg_state(doc, l)).dump();
}

std::string Service::accept_constraint(const std::string& kb_name, const std::string& leg,
                                       std::string_view body) {
  const json req = parse_body(body);
  const auto path = kb_path(kb_name);
  auto lock = kb_lock(kb_name);
  std::unique_lock write(*lock);
  const auto doc = kb::load_kb(path.string());
  const LegNet net = kb::structure_of(doc);
  const LegId l = net.leg_id(leg);
  const ElicitationState state = kb::leg_state(doc, l);
  const VarMask key = kb::key_from_names(net, l, field<std::vector<std::string>>(req, "key"));
  if (state.next_key() != key) {
    throw Error(ErrorCode::NotNextKey, "that key is not the next constraint of LEG '" + leg + "'");
  }
  ElicitationState next = state;
  if (req.contains("skip") && field<bool>(req, "skip")) {
    next = state.skip();
  } else if (req.contains("default") && field<bool>(req, "default")) {
    next = state.accept_default();
  } else if (req.contains("given")) {
    const VarMask given = kb::key_from_names(net, l, field<std::vector<std::string>>(req, "given"));
    next = state.accept(ConditionalEntry{given, field<double>(req, "probability")});
  } else {
    next = state.accept(field<double>(req, "value"));
  }
  kb::save_text(path.string(), kb::serialize(kb::with_leg_state(doc, l, next)));
  return prompt_json(net, l, next).dump();
}

std::string Service::reset_leg(const std::string& kb_name, const std::string& leg) {
  const auto path = kb_path(kb_name);
  auto lock = kb_lock(kb_name);
  std::unique_lock write(*lock);
  auto doc = kb::load_kb(path.string());
  const LegNet net = kb::structure_of(doc);
  const LegId l = net.leg_id(leg);
  doc.legs[l].constraints.clear();
  doc.legs[l].cmd.reset();
  kb::save_text(path.string(), kb::serialize(doc));
  return prompt_json(net, l, kb::leg_state(doc, l)).dump();
}

std::string Service::build_kb(const std::string& kb_name, std::string_view body) {
  const json req = parse_body(body);
  kb::BuildOptions options;
  if (req.contains("max_order")) options.max_order = field<int>(req, "max_order");
  const auto path = kb_path(kb_name);
  auto lock = kb_lock(kb_name);
  std::unique_lock write(*lock);
  const auto built = kb::build(kb::load_kb(path.string()), options);
  kb::save_text(path.string(), kb::serialize(built));
  const LegNet net = kb::load_net(built);
  const auto fp = storage_footprint(net);
  json out;
  out["kb"] = kb_name;
  out["footprint"] = {{"cmd_entries", fp.cmd_entries}, {"full_joint_entries", fp.full_joint_entries}};
  out["legs"] = json::array();
  for (const auto& l : built.legs) {
    out["legs"].push_back({{"name", l.name}, {"variables", l.variables}, {"cmd", *l.cmd}});
  }
  return out.dump();
}

std::string Service::create_session(std::string_view body) {
  const json req = parse_body(body);
  const auto name = field<std::string>(req, "kb");
  const bool strict = req.contains("strict") && field<bool>(req, "strict");
  const auto path = kb_path(name);
  std::shared_ptr<const Session> s;
  {
    auto lock = kb_lock(name);
    std::shared_lock read(*lock);
    s = std::make_shared<const Session>(kb::load_net(kb::load_kb(path.string()), strict));
  }
  auto slot = std::make_shared<SessionSlot>();
  slot->kb = name;
  slot->snapshot = s;
  std::string id;
  {
    std::lock_guard lock(registry_mutex_);
    id = "s" + std::to_string(next_session_++);
    sessions_[id] = slot;
  }
  return json{{"session", id}, {"kb", name}, {"marginals", summary_json(*s)}}.dump();
}

std::string Service::session_document(const std::string& id) {
  const auto slot = session(id);
  return kb::serialize(kb::session_document(slot->kb, *slot->current()));
}

std::string Service::assert_evidence(const std::string& id, std::string_view body) {
  const json req = parse_body(body);
  const auto slot = session(id);
  std::lock_guard write(slot->writer);
  const auto before = slot->current();
  const LegNet& net = before->current();
  std::vector<EvidenceAssertion> batch;
  const auto it = req.find("evidence");
  if (it == req.end() || !it->is_array()) throw Error::schema("$.evidence", "expected an array");
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& e = it->at(i);
    const std::string at = "$.evidence[" + std::to_string(i) + "]";
    if (!e.is_object() || !e.contains("variable") || !e["variable"].is_string() ||
        !e.contains("observed") || !e["observed"].is_boolean()) {
      throw Error::schema(at, "expected {\"variable\": string, \"observed\": bool}");
    }
    batch.push_back({net.variable_id(e["variable"].get<std::string>()), e["observed"].get<bool>(), 0});
  }
  auto after = std::make_shared<const Session>(gbi::assert_evidence(*before, batch));
  {
    std::lock_guard lock(slot->snapshot_mutex);
    slot->snapshot = after;
  }
  return json{{"session", id}, {"marginals", summary_json(*after)}}.dump();
}

std::string Service::marginals(const std::string& id) {
  const auto s = session(id)->current();
  return json{{"session", id}, {"marginals", summary_json(*s)}}.dump();
}

std::string Service::rank_evidence(const std::string& id, const std::string& direction) {
  RankDirection d;
  if (direction == "most") {
    d = RankDirection::MostLikely;
  } else if (direction == "least") {
    d = RankDirection::LeastLikely;
  } else {
    throw Error(ErrorCode::InvalidArgument, "direction must be 'most' or 'least'");
  }
  const auto s = session(id)->current();
  json ranking = json::array();
  for (const auto& r : gbi::rank_evidence(*s, d)) {
    ranking.push_back({{"variable", s->current().variable(r.variable).name}, {"marginal", r.marginal}});
  }
  return json{{"session", id}, {"direction", direction}, {"ranking", ranking}}.dump();
}

std::string Service::trace(const std::string& id) {
  const auto slot = session(id);
  const json doc = json::parse(kb::serialize(kb::session_document(slot->kb, *slot->current())));
  return json{{"session", id}, {"trace", doc["trace"]}}.dump();
}

std::string Service::consistency(const std::string& id) {
  const auto s = session(id)->current();
  const LegNet& net = s->current();
  const auto report = check_consistency(net);
  json edges = json::array();
  for (std::size_t i = 0; i < report.edges.size(); ++i) {
    const auto& e = report.edges[i];
    std::vector<std::string> shared;
    for (VarId v : net.intersections()[i].shared) shared.push_back(net.variable(v).name);
    edges.push_back({{"a", net.leg(e.a).name},
                     {"b", net.leg(e.b).name},
                     {"shared", shared},
                     {"max_abs_diff", e.max_abs_diff}});
  }
  return json{{"session", id}, {"max_discrepancy", report.max_discrepancy()}, {"edges", edges}}.dump();
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>()) {
  auto route = [&service](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const Response r = service.handle(req.method, req.path, req.body, query);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  const std::string any = "/.*";
  impl_->server.Get(any, route);
  impl_->server.Post(any, route);
  impl_->server.Put(any, route);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace gbi::service
