#include "toolbench/rest/service.hpp"

#include <httplib.h>

#include <atomic>
#include <csignal>

#include "toolbench/spec/emitter.hpp"
#include "toolbench/transpile/build.hpp"
#include "toolbench/transpile/pools.hpp"
#include "toolbench/util/error.hpp"
#include "toolbench/util/fs.hpp"

namespace toolbench::rest {

namespace {

std::atomic<std::uint64_t> next_instance{1};

// One read-only connection per worker thread and database.
const runtime::Database& thread_database(std::uint64_t instance, const std::filesystem::path& path) {
  thread_local std::map<std::pair<std::uint64_t, std::string>, std::unique_ptr<runtime::Database>>
      cache;
  auto& slot = cache[{instance, path.string()}];
  if (!slot) slot = std::make_unique<runtime::Database>(path);
  return *slot;
}

HttpResponse error_response(int status, Json detail) {
  return {status, Json{{"detail", std::move(detail)}}};
}

std::atomic<RestService*> active_service{nullptr};

extern "C" void handle_signal(int) {
  if (auto* s = active_service.load()) s->stop();
}

}  // namespace

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) {
    throw Error(ErrorCode::bad_argument, "port out of range: " + std::to_string(port));
  }
  if (max_concurrent == 0) throw Error(ErrorCode::bad_argument, "max concurrent requests must be positive");
  if (timeout_ms <= 0) throw Error(ErrorCode::bad_argument, "timeout must be positive");
  if (!std::filesystem::is_directory(db_root)) {
    throw Error(ErrorCode::io_error, "database root not found: " + db_root.string());
  }
  if (!std::filesystem::is_regular_file(pool_path)) {
    throw Error(ErrorCode::io_error, "endpoint pool not found: " + pool_path.string());
  }
}

struct RestService::Server {
  httplib::Server http;
};

RestService::RestService(std::vector<RestEndpoint> endpoints, std::filesystem::path db_root)
    : endpoints_(std::move(endpoints)),
      db_root_(std::move(db_root)),
      instance_id_(next_instance++) {
  for (std::size_t i = 0; i < endpoints_.size(); ++i) {
    const auto& e = endpoints_[i];
    if (!by_path_.emplace(e.path, i).second) {
      throw Error(ErrorCode::schema_error, "duplicate endpoint path: " + e.path);
    }
    const auto db_path = db_root_ / (e.db + ".sqlite");
    runtime::Database db(db_path);
    try {
      db.prepare_check(e.sql_template);
    } catch (const Error& err) {
      throw Error(ErrorCode::database_error,
                  "endpoint " + e.name + " does not prepare: " + err.what());
    }
  }
}

RestService::~RestService() { stop(); }

HttpResponse RestService::handle_get(const std::string& path,
                                     const std::multimap<std::string, std::string>& query) const {
  if (path == "/health") return {200, Json{{"status", "ok"}}};
  if (path == "/openapi.json") return {200, spec()};
  auto it = by_path_.find(path);
  if (it == by_path_.end()) return error_response(404, "Not Found");
  const RestEndpoint& endpoint = endpoints_[it->second];
  try {
    const Json args = coerce_query_params(endpoint, query);
    const auto& db = thread_database(instance_id_, db_root_ / (endpoint.db + ".sqlite"));
    return {200, execute_endpoint(endpoint, args, db)};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::missing_param) {
      std::string name = e.what();
      const auto colon = name.rfind(": ");
      if (colon != std::string::npos) name = name.substr(colon + 2);
      return error_response(422, Json::array({Json{{"loc", Json::array({"query", name})},
                                                   {"msg", "field required"},
                                                   {"type", "missing"}}}));
    }
    if (e.code() == ErrorCode::bad_type) return error_response(400, e.what());
    return error_response(500, "Internal Server Error");
  } catch (const std::exception&) {
    return error_response(500, "Internal Server Error");
  }
}

Json RestService::spec() const {
  return spec::emit_pool_spec(transpile::rest_pool(endpoints_));
}

int RestService::bind(const std::string& host, int port, int timeout_ms, std::size_t workers) {
  server_ = std::make_unique<Server>();
  auto& http = server_->http;
  const time_t sec = timeout_ms / 1000;
  const time_t usec = static_cast<time_t>(timeout_ms % 1000) * 1000;
  http.set_read_timeout(sec, usec);
  http.set_write_timeout(sec, usec);
  http.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
  http.Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
    std::multimap<std::string, std::string> query(req.params.begin(), req.params.end());
    const HttpResponse r = handle_get(req.path, query);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  });
  const int bound = port == 0 ? http.bind_to_any_port(host) : (http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void RestService::run() {
  if (!server_) throw Error(ErrorCode::io_error, "service is not bound");
  server_->http.listen_after_bind();
}

void RestService::stop() {
  if (server_) server_->http.stop();
}

void serve(const ServiceConfig& config, const std::function<void(int)>& on_ready) {
  config.validate();
  auto endpoints = transpile::endpoints_from_json(Json::parse(util::read_file(config.pool_path)));
  RestService service(std::move(endpoints), config.db_root);
  const int port = service.bind(config.host, config.port, config.timeout_ms, config.max_concurrent);
  active_service = &service;
  auto prev_int = std::signal(SIGINT, handle_signal);
  auto prev_term = std::signal(SIGTERM, handle_signal);
  if (on_ready) on_ready(port);
  service.run();
  active_service = nullptr;
  std::signal(SIGINT, prev_int);
  std::signal(SIGTERM, prev_term);
}

}  // namespace toolbench::rest
