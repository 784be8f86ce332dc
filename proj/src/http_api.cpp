#include "fedgate/http_api.hpp"

#include "fedgate/config.hpp"
#include "httplib.h"

namespace fedgate::gateway {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, http_status_for(code),
            {{"error", message}, {"code", error_code_name(code)}});
}

/// Runs `fn`, turning thrown errors into JSON error responses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, e.code(), e.what());
  } catch (const json::exception& e) {
    send_error(res, ErrorCode::kInvalidSpec, std::string("bad JSON body: ") + e.what());
  } catch (const std::exception& e) {
    send_json(res, 500, {{"error", e.what()}, {"code", "Internal"}});
  }
}

json cluster_json(const cluster::ClusterView& v) {
  auto j = config::to_json(v.descriptor);
  j["state"] = cluster::to_string(v.status.state);
  j["consecutive_probe_failures"] = v.status.consecutive_probe_failures;
  j["last_probe_time"] = v.status.last_probe_time
                             ? json(v.status.last_probe_time->count())
                             : json(nullptr);
  j["running_queries"] = v.load.running_queries;
  j["committed_memory_bytes"] = v.load.committed_memory_bytes;
  return j;
}

} // namespace

void install_routes(httplib::Server& server, Gateway& gw) {
  server.Post("/v1/query", [&gw](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = json::parse(req.body);
      if (!body.is_object() || !body.contains("sql") || !body["sql"].is_string()) {
        throw Error(ErrorCode::kInvalidSpec, "body must be {\"sql\": \"...\"}");
      }
      auto rec = gw.submit_query(body["sql"].get<std::string>());
      const int status = rec.state == QueryState::kFailed && rec.error_code
                             ? http_status_for(*rec.error_code)
                             : 200;
      send_json(res, status, to_json(rec, true));
    });
  });
  server.Get(R"(/v1/query/([^/]+))",
             [&gw](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 send_json(res, 200, to_json(gw.get_query(req.matches[1].str()), true));
               });
             });
  server.Get("/v1/status", [&gw](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(gw.aggregated_stats())); });
  });
  server.Get("/v1/clusters", [&gw](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json out = json::array();
      for (const auto& v : gw.clusters()) {
        out.push_back(cluster_json(v));
      }
      send_json(res, 200, out);
    });
  });
  server.Post("/v1/admin/cluster",
              [&gw](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const auto desc = config::descriptor_from_json(json::parse(req.body));
                  gw.add_cluster(desc);
                  send_json(res, 201, config::to_json(desc));
                });
              });
  server.Delete(R"(/v1/admin/cluster/([^/]+))",
                [&gw](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    gw.remove_cluster(req.matches[1].str());
                    send_json(res, 200, {{"removed", req.matches[1].str()}});
                  });
                });
  server.Post(R"(/v1/admin/cluster/([^/]+)/(fail|recover))",
              [&gw](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const auto id = req.matches[1].str();
                  if (req.matches[2].str() == "fail") {
                    gw.inject_failure(id);
                  } else {
                    gw.recover(id);
                  }
                  send_json(res, 200, {{"cluster_id", id}, {"action", req.matches[2].str()}});
                });
              });
}

Pumper::Pumper(Gateway& gw, std::chrono::milliseconds period)
    : thread_([this, &gw, period] {
        while (!stop_.load()) {
          gw.pump();
          std::this_thread::sleep_for(period);
        }
      }) {}

Pumper::~Pumper() {
  stop_.store(true);
  thread_.join();
}

GatewayClient::GatewayClient(const std::string& base_url, std::chrono::seconds timeout)
    : base_url_(base_url), client_(std::make_unique<httplib::Client>(base_url)) {
  client_->set_connection_timeout(timeout);
  client_->set_read_timeout(timeout);
}

GatewayClient::~GatewayClient() = default;

json GatewayClient::request(const std::string& method, const std::string& path,
                            const std::optional<json>& body, bool allow_error_body) {
  httplib::Result res;
  if (method == "GET") {
    res = client_->Get(path);
  } else {
    res = client_->Post(path, body ? body->dump() : std::string("{}"),
                        "application/json");
  }
  if (!res) {
    throw Error(ErrorCode::kGatewayUnreachable,
                "cannot reach gateway at " + base_url_ + ": " +
                    httplib::to_string(res.error()));
  }
  json parsed;
  try {
    parsed = json::parse(res->body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::kGatewayUnreachable,
                "gateway answered " + std::to_string(res->status) + " with a non-JSON body");
  }
  if (res->status >= 300 && !(allow_error_body && parsed.contains("id"))) {
    const auto code = parsed.contains("code") && parsed["code"].is_string()
                          ? error_code_from_name(parsed["code"].get<std::string>())
                          : std::nullopt;
    const auto message = parsed.value("error", std::string("request failed"));
    throw Error(code.value_or(ErrorCode::kGatewayUnreachable), message);
  }
  return parsed;
}

json GatewayClient::submit(const std::string& sql) {
  return request("POST", "/v1/query", json{{"sql", sql}}, true);
}

json GatewayClient::get_query(const std::string& id) {
  return request("GET", "/v1/query/" + id, std::nullopt, false);
}

json GatewayClient::status() {
  return request("GET", "/v1/status", std::nullopt, false);
}

json GatewayClient::clusters() {
  return request("GET", "/v1/clusters", std::nullopt, false);
}

} // namespace fedgate::gateway
