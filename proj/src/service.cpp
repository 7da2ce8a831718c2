#include "lbf/service.hpp"

#include <chrono>
#include <ctime>
#include <random>

#include <fmt/format.h>
#include <httplib.h>

namespace lbf::service {
namespace {

using ordered_json = nlohmann::ordered_json;

class HttpError : public Error {
 public:
  HttpError(int status, std::string code, const std::string& message, std::string field = {})
      : Error(message), status_(status), code_(std::move(code)), field_(std::move(field)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }
  const std::string& field() const { return field_; }

 private:
  int status_;
  std::string code_;
  std::string field_;
};

Response error_response(int status, const std::string& code, const std::string& message,
                        const std::string& field = {}) {
  ordered_json err;
  err["code"] = code;
  err["message"] = message;
  if (!field.empty()) err["field"] = field;
  ordered_json body;
  body["error"] = std::move(err);
  return Response{status, std::move(body)};
}

// Runs `fn`, mapping library exceptions onto structured error bodies.
template <typename Fn>
Response guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const HttpError& e) {
    return error_response(e.status(), e.code(), e.what(), e.field());
  } catch (const io::ParseError& e) {
    return error_response(400, "invalid_request", e.what(), e.location());
  } catch (const SingularBlockError& e) {
    return error_response(422, "inference_failed", e.what());
  } catch (const DomainError& e) {
    return error_response(422, "invalid_evidence", e.what());
  } catch (const DimensionError& e) {
    return error_response(422, "invalid_evidence", e.what());
  } catch (const VariableError& e) {
    return error_response(422, "invalid_evidence", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json evidence_json(const std::vector<io::EvidenceSpec>& list) {
  // Reuse the canonical writer so payloads match the session files.
  return ordered_json::parse(io::serialize_evidence(list))["evidence"];
}

std::vector<io::EvidenceSpec> parse_preview(const std::string& text) {
  const auto trimmed = text.find_first_not_of(" \t\r\n");
  if (trimmed != std::string::npos && text[trimmed] == '[') return io::parse_evidence(text);
  return {io::parse_evidence_item(text)};
}

}  // namespace

Service::Service(io::ModelRepository models, std::filesystem::path session_dir)
    : models_(std::move(models)), sessions_(std::move(session_dir)) {}

std::string Service::model_version(const io::ModelDocument& doc) const {
  return digest(io::serialize_model(doc));
}

Response Service::list_models() const {
  return guarded([&] {
    ordered_json list = ordered_json::array();
    for (const auto& id : models_.list()) {
      ordered_json m;
      m["id"] = id;
      try {
        const auto doc = models_.load(id);
        m["name"] = doc.name;
        m["model_version"] = model_version(doc);
      } catch (const Error& e) {
        m["error"] = e.what();
      }
      list.push_back(std::move(m));
    }
    ordered_json body;
    body["models"] = std::move(list);
    return Response{200, std::move(body)};
  });
}

Response Service::get_model(const std::string& id) const {
  return guarded([&] {
    if (!models_.exists(id)) throw HttpError(404, "not_found", "unknown model '" + id + "'");
    const auto doc = models_.load(id);
    ordered_json body;
    body["id"] = id;
    body["model_version"] = model_version(doc);
    body["model"] = ordered_json::parse(io::serialize_model(doc));
    return Response{200, std::move(body)};
  });
}

std::string Service::new_session_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(id_guard_);
  return fmt::format("s{:04d}{:08x}", ++id_counter_, static_cast<unsigned>(rng()));
}

std::shared_ptr<const ScenarioState> Service::build_state(io::SessionRecord record) const {
  if (!models_.exists(record.base_model))
    throw HttpError(409, "missing_model",
                    "base model '" + record.base_model + "' of session '" + record.id +
                        "' is missing");
  auto state = std::make_shared<ScenarioState>();
  state->model = models_.load(record.base_model);
  state->model_version = model_version(state->model);
  state->evaluation = evaluate_model(state->model, record.evidence);
  state->record = std::move(record);
  return state;
}

std::shared_ptr<Service::Slot> Service::slot(const std::string& id) {
  if (!io::valid_id(id)) throw HttpError(404, "not_found", "unknown session '" + id + "'");
  std::shared_ptr<Slot> s;
  {
    std::lock_guard lock(slots_guard_);
    auto& entry = slots_[id];
    if (!entry) entry = std::make_shared<Slot>();
    s = entry;
  }
  std::unique_lock lock(s->mutex);
  if (!s->state) {
    if (!sessions_.exists(id)) {
      lock.unlock();
      std::lock_guard guard(slots_guard_);
      slots_.erase(id);
      throw HttpError(404, "not_found", "unknown session '" + id + "'");
    }
    s->state = build_state(sessions_.load(id));
  }
  return s;
}

ordered_json Service::report_body(const ScenarioState& s) const {
  ordered_json body;
  body["session"] = s.record.id;
  body["model"] = s.record.base_model;
  body["model_version"] = s.model_version;
  body["session_version"] =
      digest(s.model_version + "\n" + io::serialize_evidence(s.record.evidence));
  body["created"] = s.record.created;
  body["evidence"] = evidence_json(s.record.evidence);
  body["report"] = to_json(s.evaluation);
  return body;
}

Response Service::create_session(const std::string& body) {
  return guarded([&] {
    ordered_json request;
    try {
      request = ordered_json::parse(body);
    } catch (const ordered_json::parse_error& e) {
      throw HttpError(400, "invalid_request", e.what());
    }
    if (!request.is_object() || !request.contains("model") || !request["model"].is_string())
      throw HttpError(400, "invalid_request", "expected {\"model\": \"<id>\"}", "/model");
    const std::string model = request["model"].get<std::string>();
    if (!models_.exists(model))
      throw HttpError(404, "not_found", "unknown model '" + model + "'", "/model");

    io::SessionRecord record;
    record.id = new_session_id();
    record.base_model = model;
    record.created = utc_timestamp();
    auto state = build_state(record);
    sessions_.save(state->record);

    auto s = std::make_shared<Slot>();
    s->state = state;
    {
      std::lock_guard lock(slots_guard_);
      slots_[record.id] = s;
    }
    return Response{201, report_body(*state)};
  });
}

Response Service::get_session(const std::string& id) {
  return guarded([&] {
    auto s = slot(id);
    std::shared_lock lock(s->mutex);
    return Response{200, ordered_json::parse(io::serialize_session(s->state->record))};
  });
}

Response Service::get_report(const std::string& id) {
  return guarded([&] {
    auto s = slot(id);
    std::shared_lock lock(s->mutex);
    return Response{200, report_body(*s->state)};
  });
}

Response Service::add_evidence(const std::string& id, const std::string& body) {
  return guarded([&] {
    const io::EvidenceSpec item = io::parse_evidence_item(body);
    io::to_evidence_item(item);
    auto s = slot(id);
    std::unique_lock lock(s->mutex);
    io::SessionRecord record = s->state->record;
    record.evidence.push_back(item);
    // Evaluate before persisting so a failing item never reaches the store.
    auto next = build_state(std::move(record));
    sessions_.save(next->record);
    s->state = next;
    return Response{201, report_body(*next)};
  });
}

Response Service::remove_last_evidence(const std::string& id) {
  return guarded([&] {
    auto s = slot(id);
    std::unique_lock lock(s->mutex);
    if (s->state->record.evidence.empty())
      throw HttpError(409, "empty_timeline", "session '" + id + "' has no evidence to remove");
    io::SessionRecord record = s->state->record;
    record.evidence.pop_back();
    auto next = build_state(std::move(record));
    sessions_.save(next->record);
    s->state = next;
    return Response{200, report_body(*next)};
  });
}

Response Service::whatif(const std::string& id, const std::string& evidence_param) {
  return guarded([&] {
    if (evidence_param.empty())
      throw HttpError(400, "invalid_request", "missing 'evidence' query parameter", "evidence");
    const auto preview = parse_preview(evidence_param);
    for (const auto& e : preview) io::to_evidence_item(e);
    auto s = slot(id);
    std::shared_ptr<const ScenarioState> base;
    {
      std::shared_lock lock(s->mutex);
      base = s->state;
    }
    io::SessionRecord record = base->record;
    record.evidence.insert(record.evidence.end(), preview.begin(), preview.end());
    auto state = build_state(std::move(record));
    ordered_json body = report_body(*state);
    body["preview"] = true;
    body["base_session_version"] =
        digest(base->model_version + "\n" + io::serialize_evidence(base->record.evidence));
    return Response{200, std::move(body)};
  });
}

// ---- HTTP wiring ----

void apply_bind_address(ServeOptions& options, const std::string& address) {
  if (address.empty()) return;
  const auto colon = address.rfind(':');
  std::string host = address;
  std::string port;
  if (colon != std::string::npos) {
    host = address.substr(0, colon);
    port = address.substr(colon + 1);
  } else if (address.find_first_not_of("0123456789") == std::string::npos) {
    host.clear();
    port = address;
  }
  if (!host.empty()) options.host = host;
  if (!port.empty()) {
    try {
      std::size_t used = 0;
      const int p = std::stoi(port, &used);
      if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range(port);
      options.port = p;
    } catch (const std::exception&) {
      throw Error("invalid port in bind address '" + address + "'");
    }
  }
}

struct Server::Impl {
  ServeOptions options;
  Service service;
  httplib::Server http;

  explicit Impl(const ServeOptions& o)
      : options(o), service(io::ModelRepository(o.model_dir), o.session_dir) {
    auto reply = [](httplib::Response& res, const Response& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    http.Get("/models", [&, reply](const httplib::Request&, httplib::Response& res) {
      reply(res, service.list_models());
    });
    http.Get(R"(/models/([A-Za-z0-9_-]+))",
             [&, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, service.get_model(req.matches[1]));
             });
    http.Post("/sessions", [&, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.create_session(req.body));
    });
    http.Get(R"(/sessions/([A-Za-z0-9_-]+))",
             [&, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, service.get_session(req.matches[1]));
             });
    http.Get(R"(/sessions/([A-Za-z0-9_-]+)/report)",
             [&, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, service.get_report(req.matches[1]));
             });
    http.Post(R"(/sessions/([A-Za-z0-9_-]+)/evidence)",
              [&, reply](const httplib::Request& req, httplib::Response& res) {
                reply(res, service.add_evidence(req.matches[1], req.body));
              });
    http.Delete(R"(/sessions/([A-Za-z0-9_-]+)/evidence/last)",
                [&, reply](const httplib::Request& req, httplib::Response& res) {
                  reply(res, service.remove_last_evidence(req.matches[1]));
                });
    http.Get(R"(/sessions/([A-Za-z0-9_-]+)/whatif)",
             [&, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, service.whatif(req.matches[1], req.get_param_value("evidence")));
             });
    http.set_error_handler([reply](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty())
        reply(res, error_response(res.status, "not_found", "no such endpoint"));
    });
  }
};

Server::Server(const ServeOptions& options) : impl_(std::make_unique<Impl>(options)) {}

Server::~Server() { stop(); }

int Server::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    const int port = impl_->http.bind_to_any_port(o.host);
    if (port <= 0) throw Error("cannot bind " + o.host);
    o.port = port;
    return port;
  }
  if (!impl_->http.bind_to_port(o.host, o.port))
    throw Error(fmt::format("cannot bind {}:{}", o.host, o.port));
  return o.port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace lbf::service
