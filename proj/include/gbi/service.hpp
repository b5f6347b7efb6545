#pragma once

// HTTP+JSON front end over a directory of knowledge bases.
//
//   GET  /kbs                                     list stored KBs
//   GET  /kbs/{kb}                                fetch a KB document
//   PUT  /kbs/{kb}                                store a KB document
//   GET  /kbs/{kb}/legs/{leg}/next-constraint     key, interval, default, remaining
//   POST /kbs/{kb}/legs/{leg}/accept-constraint   {"key", "value" | "given"+"probability" | "default" | "skip"}
//   POST /kbs/{kb}/legs/{leg}/reset               drop a LEG's records
//   POST /kbs/{kb}/build                          {"max_order"?}
//   POST /sessions                                {"kb", "strict"?}
//   GET  /sessions/{id}                           session document
//   POST /sessions/{id}/assert-evidence           {"evidence": [{"variable", "observed"}]}
//   GET  /sessions/{id}/marginals
//   GET  /sessions/{id}/rank-evidence?direction=most|least
//   GET  /sessions/{id}/trace
//   GET  /sessions/{id}/consistency
//
// Errors come back as {"error": {"code", "message", "interval"?, "path"?}}.
// Writes to one KB or session are serialized; reads see the last completed
// snapshot.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "gbi/error.hpp"
#include "gbi/inference.hpp"

namespace gbi::service {

struct Response {
  int status = 200;
  std::string body;
};

int http_status(ErrorCode code) noexcept;
std::string error_body(const Error& e);

class Service {
 public:
  explicit Service(std::filesystem::path kb_dir);

  Response handle(std::string_view method, std::string_view path, std::string_view body,
                  const std::map<std::string, std::string>& query = {});

 private:
  struct SessionSlot {
    std::string kb;
    std::mutex writer;
    mutable std::mutex snapshot_mutex;
    std::shared_ptr<const Session> snapshot;

    std::shared_ptr<const Session> current() const;
  };

  std::shared_ptr<std::shared_mutex> kb_lock(const std::string& name);
  std::shared_ptr<SessionSlot> session(const std::string& id);
  std::filesystem::path kb_path(const std::string& name) const;

  std::string list_kbs();
  std::string fetch_kb(const std::string& name);
  std::string store_kb(const std::string& name, std::string_view body);
  std::string next_constraint(const std::string& kb, const std::string& leg);
  std::string accept_constraint(const std::string& kb, const std::string& leg, std::string_view body);
  std::string reset_leg(const std::string& kb, const std::string& leg);
  std::string build_kb(const std::string& kb, std::string_view body);
  std::string create_session(std::string_view body);
  std::string session_document(const std::string& id);
  std::string assert_evidence(const std::string& id, std::string_view body);
  std::string marginals(const std::string& id);
  std::string rank_evidence(const std::string& id, const std::string& direction);
  std::string trace(const std::string& id);
  std::string consistency(const std::string& id);

  std::filesystem::path kb_dir_;
  std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<std::shared_mutex>> kb_locks_;
  std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;
  std::uint64_t next_session_ = 1;
};

// Blocking HTTP server for a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port, or -1. Port 0 picks a free one.
  int bind(const std::string& host, int port);
  bool listen();  // blocks until stop()
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gbi::service
