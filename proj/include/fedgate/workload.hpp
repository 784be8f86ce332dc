#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fedgate/config.hpp"
#include "fedgate/engine_simulator.hpp"
#include "fedgate/gateway.hpp"
#include "fedgate/sql_frontend.hpp"
#include "json.hpp"

namespace fedgate::workload {

struct StatementMix {
  double select = 0.7;
  double create = 0.1;
  double update = 0.1;
  double other = 0.1;
};

struct WorkloadSpec {
  std::size_t query_count = 1000;
  StatementMix mix;
  /// Poisson arrivals per second.
  double arrival_rate = 0.05;
  /// Replaces the config's mixture in embedded runs.
  sim::WorkloadMixture durations;
  /// Share of SELECTs drawn from the heavy templates.
  double heavy_fraction = 0.1;
  std::uint64_t seed = 0;
  std::vector<std::string> tables = {"lineitem", "orders", "customer", "part",
                                     "partsupp", "supplier", "nation", "region"};
  std::string heavy_table = "events_archive";
};

/// Throws InvalidSpec.
void validate(const WorkloadSpec& spec);

struct WorkloadItem {
  double arrival_s = 0.0;
  std::string sql;
  sql::StatementClass intended = sql::StatementClass::kSelect;
  bool heavy_template = false;
};

std::vector<WorkloadItem> generate_workload(const WorkloadSpec& spec);

/// Two light clusters and one dedicated heavy cluster in the cloud zone,
/// TPC-H tables plus one very large archive table.
config::GatewayConfig default_bench_config();

struct ScheduledAction {
  enum class Kind { kFail, kRecover };
  double at_s = 0.0;
  Kind kind = Kind::kFail;
  std::string cluster_id;
};

struct BenchOptions {
  std::vector<ScheduledAction> actions;
  /// Called after every submission and action.
  std::function<void(gateway::Gateway&, Seconds)> observer;
  /// Receives the query log as it is written.
  std::ostream* log_sink = nullptr;
};

struct LatencySummary {
  std::size_t count = 0;
  std::optional<double> p50;
  std::optional<double> p90;
  std::optional<double> p99;
};

struct BenchReport {
  std::size_t query_count = 0;
  std::map<std::string, std::size_t> class_counts;
  std::size_t finished = 0;
  std::size_t failed = 0;
  std::map<std::string, std::size_t> failures_by_code;
  /// End minus submit time of FINISHED queries.
  LatencySummary latency_all;
  LatencySummary latency_light;
  LatencySummary latency_heavy;
  std::map<std::string, std::size_t> cluster_queries;
  std::map<std::string, double> cluster_share;
  double span_s = 0.0;
  double wall_time_s = 0.0;
  std::string policy;
};

nlohmann::json to_json(const BenchReport& report);

/// Folds query log lines into a report, keeping the last line per id.
/// Lines that are not JSON objects are skipped.
BenchReport summarize_log(std::istream& log);
BenchReport summarize_records(const std::vector<nlohmann::json>& lines);

/// Runs the trace in-process on a virtual clock until every query is
/// terminal. Deterministic for a fixed spec and config.
BenchReport run_bench(const WorkloadSpec& spec, const config::GatewayConfig& cfg,
                      const BenchOptions& options = {});

/// Submits the trace to a live gateway with up to `concurrency` requests in
/// flight, ignoring arrival offsets, then polls until every query is
/// terminal. Throws GatewayUnreachable.
BenchReport run_live_bench(const WorkloadSpec& spec, const std::string& url,
                           int concurrency, double poll_timeout_s = 600.0);

} // namespace fedgate::workload
