#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "fedgate/gateway.hpp"
#include "json.hpp"

namespace httplib {
class Server;
class Client;
}

namespace fedgate::gateway {

/// Registers the /v1 endpoints of `gw` on `server`.
void install_routes(httplib::Server& server, Gateway& gw);

/// Keeps a realtime gateway moving between requests: completions and
/// probe ticks happen even when nobody calls in.
class Pumper {
 public:
  Pumper(Gateway& gw, std::chrono::milliseconds period);
  ~Pumper();
  Pumper(const Pumper&) = delete;
  Pumper& operator=(const Pumper&) = delete;

 private:
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

/// JSON client for a running gateway. Transport failures throw
/// GatewayUnreachable; error responses throw Error with the server's code.
class GatewayClient {
 public:
  explicit GatewayClient(const std::string& base_url,
                         std::chrono::seconds timeout = std::chrono::seconds(10));
  ~GatewayClient();

  nlohmann::json submit(const std::string& sql);
  nlohmann::json get_query(const std::string& id);
  nlohmann::json status();
  nlohmann::json clusters();

 private:
  nlohmann::json request(const std::string& method, const std::string& path,
                         const std::optional<nlohmann::json>& body,
                         bool allow_error_body);
  std::string base_url_;
  std::unique_ptr<httplib::Client> client_;
};

} // namespace fedgate::gateway
