#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fedgate/clock.hpp"
#include "fedgate/cluster_registry.hpp"
#include "fedgate/config.hpp"
#include "fedgate/cost_predictor.hpp"
#include "fedgate/engine_simulator.hpp"
#include "fedgate/error.hpp"
#include "fedgate/router.hpp"
#include "fedgate/sql_frontend.hpp"
#include "fedgate/storage_federation.hpp"
#include "json.hpp"

namespace fedgate::gateway {

enum class QueryState { kQueued, kRouted, kRunning, kFinished, kFailed };

std::string_view to_string(QueryState state);
bool is_terminal(QueryState state);

struct QueryRecord {
  std::string id;
  std::string raw_sql;
  QueryState state = QueryState::kQueued;
  std::optional<sql::StatementClass> statement_class;
  std::vector<std::string> tables;
  std::optional<routing::RoutingDecision> decision;
  cost::CostEstimate estimate;
  cost::ResourceClass resource_class = cost::ResourceClass::kLight;
  Seconds submit_time{0.0};
  std::optional<Seconds> start_time;
  std::optional<Seconds> end_time;
  std::optional<std::string> error;
  std::optional<ErrorCode> error_code;
  int attempt = 1;
  /// Every cluster this query was dispatched to.
  std::vector<std::string> tried_clusters;
  std::uint64_t sim_memory_bytes = 0;

  std::optional<double> duration_seconds() const;
  std::optional<double> latency_seconds() const;
};

/// `with_trace` adds the routing reason lines.
nlohmann::json to_json(const QueryRecord& record, bool with_trace = false);

/// Append-only JSON-lines sink. Write failures mark the log unhealthy and
/// never propagate.
class QueryLog {
 public:
  /// Appends to `path`; an unopenable file leaves the log unhealthy.
  explicit QueryLog(const std::string& path);
  /// Writes to a caller-owned stream.
  explicit QueryLog(std::ostream& out);

  void write(const QueryRecord& record, Seconds at);
  bool healthy() const;
  std::string last_error() const;

 private:
  mutable std::mutex mu_;
  std::unique_ptr<std::ostream> owned_;
  std::ostream* out_ = nullptr;
  std::string error_;
};

struct AggregatedStats {
  Seconds at{0.0};
  std::uint64_t total_running_queries = 0;
  std::uint64_t total_queued_queries = 0;
  std::int64_t total_active_workers = 0;
  std::uint64_t total_memory_used_bytes = 0;
  std::uint64_t total_memory_pool_bytes = 0;
  std::vector<sim::ClusterStats> clusters;
  /// FAILED query records, including those that never reached a cluster.
  std::uint64_t failed_count = 0;
  std::optional<double> p90_execution_seconds;
  /// Records per state at the same instant.
  std::map<QueryState, std::uint64_t> records_by_state;
  bool log_healthy = true;
};

nlohmann::json to_json(const AggregatedStats& stats);

struct GatewayOptions {
  routing::PolicyConfig policy;
  cluster::ProbeSettings probe;
  sim::WorkloadMixture mixture;
  sim::SimSettings sim;
  std::uint64_t seed = 0;
  /// Added to clock time in query ids.
  std::uint64_t id_epoch_ms = 0;
};

/// Parses, predicts, routes and dispatches queries onto the simulated
/// clusters, tracking every query record through its lifecycle.
///
/// All time comes from the clock. Each public call first catches the
/// simulator and the health prober up to clock.now().
class Gateway {
 public:
  Gateway(std::shared_ptr<const storage::StorageFederation> catalog,
          const Clock& clock, GatewayOptions options, QueryLog* log = nullptr);
  ~Gateway();

  /// Builds catalog, clusters and policy from a config.
  static std::unique_ptr<Gateway> from_config(const config::GatewayConfig& cfg,
                                              const Clock& clock,
                                              QueryLog* log = nullptr,
                                              std::uint64_t id_epoch_ms = 0);

  void add_cluster(const cluster::ClusterDescriptor& desc);
  void remove_cluster(std::string_view id);
  void inject_failure(std::string_view id);
  void recover(std::string_view id);

  /// Never throws for query-level failures; they come back as a FAILED
  /// record carrying the error code.
  QueryRecord submit_query(std::string sql);
  /// Throws NotFound.
  QueryRecord get_query(std::string_view id);
  std::vector<QueryRecord> records();
  AggregatedStats aggregated_stats();
  cluster::RegistrySnapshot clusters();

  /// Processes everything due up to clock.now().
  void pump();
  /// Earliest pending simulator event or probe tick.
  Seconds next_wakeup();
  /// Earliest pending simulator event; probe ticks are not counted.
  std::optional<Seconds> next_sim_event();
  /// Records not yet FINISHED or FAILED.
  std::size_t open_count();

  const storage::StorageFederation& catalog() const { return *catalog_; }
  const routing::PolicyConfig& policy_config() const { return options_.policy; }

 private:
  void advance_locked(Seconds t);
  void handle_event(const sim::SimEvent& e);
  void dispatch_locked(QueryRecord& rec, const sql::ParsedQuery& q, Seconds now);
  void lose_locked(QueryRecord& rec, ErrorCode code, const std::string& message,
                   Seconds now);
  void fail_locked(QueryRecord& rec, ErrorCode code, const std::string& message,
                   Seconds now);
  void transition_locked(QueryRecord& rec, QueryState next, Seconds now);
  void release_locked(QueryRecord& rec);
  std::string next_id_locked(Seconds now);

  std::shared_ptr<const storage::StorageFederation> catalog_;
  const Clock& clock_;
  GatewayOptions options_;
  QueryLog* log_;

  std::mutex mu_;
  cluster::ClusterRegistry registry_;
  sim::EngineSimulator sim_;
  std::unique_ptr<routing::RoutingPolicy> policy_;
  cost::HeuristicCostModel model_;
  std::mt19937_64 rng_;
  std::map<std::string, QueryRecord> records_;
  /// Query id -> cluster whose LoadStats currently count it.
  std::map<std::string, std::string> holding_load_;
  Seconds processed_until_{0.0};
  Seconds next_probe_;
  std::uint64_t sequence_ = 0;
};

} // namespace fedgate::gateway
