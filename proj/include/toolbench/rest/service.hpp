#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "toolbench/rest/endpoint.hpp"
#include "toolbench/util/json.hpp"

namespace toolbench::rest {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8000;  // 0 picks a free port
  std::filesystem::path db_root;
  std::filesystem::path pool_path;
  int timeout_ms = 5000;
  std::size_t max_concurrent = 8;

  /// Throws Error(bad_argument) for an invalid port or limit and
  /// Error(io_error) for missing paths.
  void validate() const;
};

struct HttpResponse {
  int status = 200;
  Json body;
};

/// Serves a fixed set of endpoints. Each endpoint template is prepared
/// against its database on construction; any failure aborts startup.
class RestService {
 public:
  RestService(std::vector<RestEndpoint> endpoints, std::filesystem::path db_root);
  ~RestService();
  RestService(const RestService&) = delete;
  RestService& operator=(const RestService&) = delete;

  /// Request handling without the network layer.
  HttpResponse handle_get(const std::string& path,
                          const std::multimap<std::string, std::string>& query) const;

  /// Tool specs of every endpoint.
  Json spec() const;

  /// Binds the listening socket and returns the port actually used.
  int bind(const std::string& host, int port, int timeout_ms = 5000, std::size_t workers = 8);
  /// Blocks serving requests until stop() is called.
  void run();
  void stop();

  const std::vector<RestEndpoint>& endpoints() const { return endpoints_; }

 private:
  struct Server;
  std::vector<RestEndpoint> endpoints_;
  std::map<std::string, std::size_t> by_path_;
  std::filesystem::path db_root_;
  std::uint64_t instance_id_;
  std::unique_ptr<Server> server_;
};

/// Loads the pool named in the config and runs the service until SIGINT or
/// SIGTERM. `on_ready` receives the bound port.
void serve(const ServiceConfig& config, const std::function<void(int)>& on_ready = {});

}  // namespace toolbench::rest
