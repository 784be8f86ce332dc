#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "fedgate/clock.hpp"
#include "fedgate/cluster_registry.hpp"
#include "fedgate/cost_predictor.hpp"
#include "fedgate/error.hpp"

namespace fedgate::sim {

inline constexpr std::uint64_t kMinQueryMemoryBytes = 64ULL << 20;

struct DurationBand {
  double weight = 0.0;
  double min_seconds = 1.0;
  double max_seconds = 1.0;
};

/// Duration bands plus the spread of the memory noise around the estimate.
struct WorkloadMixture {
  std::vector<DurationBand> bands = {
      {0.7, 1.0, 60.0}, {0.2, 60.0, 300.0}, {0.1, 300.0, 7200.0}};
  double memory_sigma = 0.5;
};

/// Throws InvalidMixture unless weights are non-negative and sum to 1 and
/// every band is a positive interval.
void validate(const WorkloadMixture& mix);

struct ExecutionProfile {
  double duration_seconds = 1.0;
  std::uint64_t actual_memory_bytes = kMinQueryMemoryBytes;
};

ExecutionProfile sample_profile(const cost::CostEstimate& estimate,
                                const WorkloadMixture& mix, std::mt19937_64& rng);

struct SimSettings {
  int slots_per_worker = 4;
  std::size_t duration_window = 512;
};

enum class EventKind { kStarted, kCompleted, kFailed };

std::string_view to_string(EventKind kind);

struct SimEvent {
  Seconds at{0.0};
  EventKind kind = EventKind::kStarted;
  std::string cluster_id;
  std::string query_id;
  std::optional<ErrorCode> error; // kFailed only
  double duration_seconds = 0.0;  // kCompleted only
};

enum class AdmissionStatus { kRunning, kQueued, kFailed };

struct Admission {
  AdmissionStatus status = AdmissionStatus::kRunning;
  std::optional<ErrorCode> error;
};

struct ClusterStats {
  std::string cluster_id;
  std::uint64_t submitted = 0;
  std::uint64_t running_queries = 0;
  std::uint64_t queued_queries = 0;
  int active_workers = 0;
  std::uint64_t memory_used_bytes = 0;
  std::uint64_t memory_pool_bytes = 0;
  std::uint64_t completed_count = 0;
  std::uint64_t failed_count = 0;
  /// Most recent completion durations, oldest first.
  std::vector<double> recent_durations;

  /// Nearest-rank 90th percentile of recent_durations.
  std::optional<double> p90_duration() const;
  bool operator==(const ClusterStats&) const = default;
};

/// Nearest-rank percentile, p in (0,100].
std::optional<double> percentile(std::vector<double> values, double p);

class SimCluster;

/// Mock engine clusters driven by explicit time. Each cluster has its own
/// lock; no call holds two of them at once.
class EngineSimulator {
 public:
  explicit EngineSimulator(SimSettings settings = {});
  ~EngineSimulator();

  void add_cluster(const cluster::ClusterDescriptor& desc);
  /// Queries still on the cluster fail with ClusterLost.
  std::vector<SimEvent> remove_cluster(std::string_view id, Seconds now);
  bool has_cluster(std::string_view id) const;

  /// Starts the query if a slot and memory are free, else queues it.
  /// Throws ClusterUnreachable while failed, UnknownCluster.
  Admission submit(std::string_view cluster_id, std::string query_id,
                   const ExecutionProfile& profile, Seconds now);

  /// Runs every cluster up to `t`; events come back ordered by time.
  std::vector<SimEvent> advance_to(Seconds t);

  /// Earliest pending completion over all clusters.
  std::optional<Seconds> next_event_time() const;

  /// Running and queued queries fail with ClusterLost.
  std::vector<SimEvent> inject_failure(std::string_view id, Seconds now);
  void recover(std::string_view id);
  /// Health probe: false while failed, UnknownCluster otherwise.
  bool probe(std::string_view id) const;

  ClusterStats cluster_stats(std::string_view id) const;
  std::vector<ClusterStats> all_stats() const;

 private:
  std::shared_ptr<SimCluster> find(std::string_view id) const;

  SimSettings settings_;
  mutable std::shared_mutex mu_;
  std::vector<std::shared_ptr<SimCluster>> clusters_;
};

} // namespace fedgate::sim
