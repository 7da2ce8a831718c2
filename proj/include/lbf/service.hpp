#ifndef LBF_SERVICE_HPP
#define LBF_SERVICE_HPP

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "lbf/model_io.hpp"
#include "lbf/report.hpp"

namespace lbf::service {

struct Response {
  int status = 200;
  nlohmann::ordered_json body;
};

// A session's current state. `evaluation` always equals evaluating the base
// model with `record.evidence`; it is recomputed on every mutation.
struct ScenarioState {
  io::SessionRecord record;
  io::ModelDocument model;
  std::string model_version;
  Evaluation evaluation;
};

// Transport-independent request handling. Each method maps onto one
// endpoint; serve() wires them to HTTP.
//
//   GET    /models
//   GET    /models/{id}
//   POST   /sessions                      {"model": id}
//   GET    /sessions/{id}
//   GET    /sessions/{id}/report
//   POST   /sessions/{id}/evidence        evidence object
//   DELETE /sessions/{id}/evidence/last
//   GET    /sessions/{id}/whatif?evidence=<evidence object or array>
class Service {
 public:
  Service(io::ModelRepository models, std::filesystem::path session_dir);

  Response list_models() const;
  Response get_model(const std::string& id) const;
  Response create_session(const std::string& body);
  Response get_session(const std::string& id);
  Response get_report(const std::string& id);
  Response add_evidence(const std::string& id, const std::string& body);
  Response remove_last_evidence(const std::string& id);
  Response whatif(const std::string& id, const std::string& evidence_param);

 private:
  struct Slot {
    std::shared_mutex mutex;
    std::shared_ptr<const ScenarioState> state;
  };

  std::shared_ptr<Slot> slot(const std::string& id);
  std::shared_ptr<const ScenarioState> build_state(io::SessionRecord record) const;
  nlohmann::ordered_json report_body(const ScenarioState& s) const;
  std::string model_version(const io::ModelDocument& doc) const;
  std::string new_session_id();

  io::ModelRepository models_;
  io::SessionStore sessions_;
  std::mutex slots_guard_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
  std::mutex id_guard_;
  unsigned long long id_counter_ = 0;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path model_dir;
  std::filesystem::path session_dir;
};

// Splits "host:port"; a bare port or bare host keeps the other default.
void apply_bind_address(ServeOptions& options, const std::string& address);

class Server {
 public:
  explicit Server(const ServeOptions& options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds the socket; returns the bound port. Throws Error on failure.
  int bind();
  // Blocks until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lbf::service

#endif  // LBF_SERVICE_HPP
