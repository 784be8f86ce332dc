// fedgate: query gateway service and its operator tools.

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "fedgate/config.hpp"
#include "fedgate/deploy_spec.hpp"
#include "fedgate/error.hpp"
#include "fedgate/gateway.hpp"
#include "fedgate/http_api.hpp"
#include "fedgate/router.hpp"
#include "fedgate/workload.hpp"
#include "httplib.h"

using namespace fedgate;
using nlohmann::json;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) {
    g_server->stop();
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out || !(out << text)) {
    throw Error(ErrorCode::kIoError, "cannot write " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot read " + path);
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int serve(const std::string& config_flag, const std::string& host, int port,
          const std::string& log_flag, double speedup) {
  const auto cfg = config::load_config_file(config::config_path_from_env(config_flag));
  const auto log_path = log_flag.empty() ? cfg.log_path : log_flag;
  std::unique_ptr<gateway::QueryLog> log =
      log_path.empty() ? std::make_unique<gateway::QueryLog>(std::cout)
                       : std::make_unique<gateway::QueryLog>(log_path);
  if (!log->healthy()) {
    std::cerr << "warning: query log unavailable: " << log->last_error() << "\n";
  }
  RealtimeClock clock(speedup);
  const auto epoch_ms = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  auto gw = gateway::Gateway::from_config(cfg, clock, log.get(), epoch_ms);
  gateway::Pumper pumper(*gw, std::chrono::milliseconds(100));

  httplib::Server server;
  gateway::install_routes(server, *gw);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "fedgate listening on " << host << ":" << port << " policy "
            << routing::to_string(cfg.policy.kind) << " speedup " << speedup << "\n";
  if (!server.listen(host, port)) {
    throw Error(ErrorCode::kIoError, "cannot listen on " + host + ":" + std::to_string(port));
  }
  g_server = nullptr;
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedgate - federated SQL query gateway"};
  app.require_subcommand(1);

  std::string url = "http://127.0.0.1:8080";
  if (const char* env = std::getenv("FEDGATE_URL")) {
    url = env;
  }

  auto* serve_cmd = app.add_subcommand("serve", "run the gateway HTTP service");
  std::string config_path;
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string log_flag;
  double speedup = 1.0;
  serve_cmd->add_option("--config", config_path, "gateway config (FEDGATE_CONFIG overrides)");
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--log", log_flag, "query log path (default: config log_path, else stdout)");
  serve_cmd->add_option("--speedup", speedup, "simulated seconds per wall second")
      ->check(CLI::PositiveNumber);

  auto* submit_cmd = app.add_subcommand("submit", "submit one SQL statement");
  std::string sql;
  std::string zone;
  submit_cmd->add_option("sql", sql)->required();
  submit_cmd->add_option("--zone", zone)->check(CLI::IsMember({"auto", "onprem", "cloud"}));
  submit_cmd->add_option("--url", url);

  auto* status_cmd = app.add_subcommand("status", "aggregated gateway status");
  status_cmd->add_option("--url", url);

  auto* clusters_cmd = app.add_subcommand("clusters", "registered clusters");
  clusters_cmd->add_option("--url", url);

  auto* bench_cmd = app.add_subcommand("bench", "run a synthetic workload");
  workload::WorkloadSpec spec;
  std::string policy_name;
  std::string report_path;
  std::string bench_log;
  std::string bench_config;
  std::string bench_url;
  int concurrency = 8;
  bench_cmd->add_option("--queries", spec.query_count);
  bench_cmd->add_option("--policy", policy_name,
                        "ROUND_ROBIN, RANDOM, LEAST_LOADED or COST_BASED");
  bench_cmd->add_option("--seed", spec.seed);
  bench_cmd->add_option("--arrival-rate", spec.arrival_rate, "queries per second");
  bench_cmd->add_option("--report", report_path, "write the JSON report here");
  bench_cmd->add_option("--log", bench_log, "write the embedded query log here");
  bench_cmd->add_option("--config", bench_config, "gateway config for the embedded run");
  bench_cmd->add_option("--url", bench_url, "run against a live gateway instead");
  bench_cmd->add_option("--concurrency", concurrency)->check(CLI::PositiveNumber);

  auto* report_cmd = app.add_subcommand("report", "summarize a query log");
  std::string log_in;
  report_cmd->add_option("log", log_in)->required()->check(CLI::ExistingFile);

  auto* deploy_cmd = app.add_subcommand("deploy-spec", "job spec translation");
  deploy_cmd->require_subcommand(1);
  auto* translate_cmd = deploy_cmd->add_subcommand("translate", "emit a deployment descriptor");
  std::string spec_in;
  std::string target;
  std::string out_path = "-";
  translate_cmd->add_option("--in", spec_in)->required();
  translate_cmd->add_option("--target", target)
      ->required()
      ->check(CLI::IsMember({"cloud", "datacenter"}));
  translate_cmd->add_option("--out", out_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (serve_cmd->parsed()) {
      return serve(config_path, host, port, log_flag, speedup);
    }
    if (submit_cmd->parsed()) {
      gateway::GatewayClient client(url);
      const auto text = zone.empty() ? sql : "-- zone: " + zone + "\n" + sql;
      const auto rec = client.submit(text);
      std::cout << rec.dump(2) << "\n";
      return rec.value("state", "") == "FAILED" ? 2 : 0;
    }
    if (status_cmd->parsed()) {
      std::cout << gateway::GatewayClient(url).status().dump(2) << "\n";
      return 0;
    }
    if (clusters_cmd->parsed()) {
      std::cout << gateway::GatewayClient(url).clusters().dump(2) << "\n";
      return 0;
    }
    if (bench_cmd->parsed()) {
      workload::BenchReport report;
      if (!bench_url.empty()) {
        report = workload::run_live_bench(spec, bench_url, concurrency);
        if (!policy_name.empty()) {
          report.policy = policy_name;
        }
      } else {
        auto cfg = bench_config.empty() ? workload::default_bench_config()
                                        : config::load_config_file(bench_config);
        if (!policy_name.empty()) {
          const auto kind = routing::policy_kind_from_string(policy_name);
          if (!kind) {
            throw Error(ErrorCode::kInvalidConfig, "unknown policy " + policy_name);
          }
          cfg.policy.kind = *kind;
        }
        cfg.seed = spec.seed;
        std::ofstream log_out;
        workload::BenchOptions opts;
        if (!bench_log.empty()) {
          log_out.open(bench_log);
          if (!log_out) {
            throw Error(ErrorCode::kIoError, "cannot write " + bench_log);
          }
          opts.log_sink = &log_out;
        }
        report = workload::run_bench(spec, cfg, opts);
      }
      const auto text = workload::to_json(report).dump(2) + "\n";
      if (!report_path.empty()) {
        write_output(report_path, text);
      }
      std::cout << text;
      return 0;
    }
    if (report_cmd->parsed()) {
      std::ifstream in(log_in);
      std::cout << workload::to_json(workload::summarize_log(in)).dump(2) << "\n";
      return 0;
    }
    if (translate_cmd->parsed()) {
      const auto job = deploy::parse_unified_spec(read_file(spec_in));
      write_output(out_path, target == "cloud" ? deploy::emit_cloud_manifest(job)
                                               : deploy::emit_datacenter_descriptor(job));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
