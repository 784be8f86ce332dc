#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fedgate/clock.hpp"

namespace fedgate::cluster {

struct ClusterDescriptor {
  std::string id;
  std::string zone;
  std::string endpoint;
  std::set<std::string> catalogs;
  int worker_count = 1;
  std::uint64_t memory_per_worker_bytes = 0;

  std::uint64_t memory_pool_bytes() const {
    return static_cast<std::uint64_t>(worker_count) * memory_per_worker_bytes;
  }
};

/// Throws InvalidDescriptor unless id, zone and catalogs are non-empty and
/// worker count and memory are positive.
void validate(const ClusterDescriptor& desc);

enum class ClusterState { kOnline, kOffline };

std::string_view to_string(ClusterState state);

struct ClusterStatus {
  ClusterState state = ClusterState::kOnline;
  int consecutive_probe_failures = 0;
  std::optional<Seconds> last_probe_time;
};

/// Queries dispatched to a cluster and not yet terminal.
struct LoadStats {
  std::int64_t running_queries = 0;
  std::uint64_t committed_memory_bytes = 0;
};

struct ClusterView {
  ClusterDescriptor descriptor;
  ClusterStatus status;
  LoadStats load;

  const std::string& id() const { return descriptor.id; }
  bool online() const { return status.state == ClusterState::kOnline; }
};

/// Immutable registry contents captured at one instant, in registration
/// order. Cheap to copy.
class RegistrySnapshot {
 public:
  RegistrySnapshot() : views_(std::make_shared<const std::vector<ClusterView>>()) {}
  explicit RegistrySnapshot(std::shared_ptr<const std::vector<ClusterView>> views,
                            std::uint64_t version)
      : views_(std::move(views)), version_(version) {}

  std::size_t size() const { return views_->size(); }
  bool empty() const { return views_->empty(); }
  auto begin() const { return views_->begin(); }
  auto end() const { return views_->end(); }
  const ClusterView& operator[](std::size_t i) const { return (*views_)[i]; }
  const ClusterView* find(std::string_view id) const;
  /// Bumped by every registry mutation.
  std::uint64_t version() const { return version_; }

 private:
  std::shared_ptr<const std::vector<ClusterView>> views_;
  std::uint64_t version_ = 0;
};

struct ProbeSettings {
  int failure_threshold = 3;
  Seconds interval{1.0};
};

struct StateTransition {
  std::string cluster_id;
  ClusterState from;
  ClusterState to;
  Seconds at;
};

/// Returns true when the cluster answered. Exceptions count as failures.
using Prober = std::function<bool(const ClusterDescriptor&)>;

/// Central store of cluster endpoints and availability. Routers keep no
/// cluster state of their own; they route off snapshot().
///
/// A cluster goes OFFLINE when its consecutive probe failures reach the
/// threshold and comes back ONLINE on the first successful probe.
class ClusterRegistry {
 public:
  explicit ClusterRegistry(ProbeSettings settings = {});

  const ProbeSettings& settings() const { return settings_; }

  /// New clusters start ONLINE until their first probe says otherwise.
  void register_cluster(ClusterDescriptor desc);
  void deregister_cluster(std::string_view id);

  std::vector<StateTransition> probe_all(const Prober& prober, Seconds now);

  RegistrySnapshot snapshot() const;

  void record_dispatch(std::string_view id, std::uint64_t memory_bytes);
  /// Undoes one record_dispatch. Ignored for clusters no longer registered.
  void record_release(std::string_view id, std::uint64_t memory_bytes);

 private:
  ClusterView* find_locked(std::string_view id);
  void publish_locked();

  ProbeSettings settings_;
  mutable std::mutex mu_;
  std::vector<ClusterView> clusters_;
  std::shared_ptr<const std::vector<ClusterView>> published_;
  std::uint64_t version_ = 0;
};

} // namespace fedgate::cluster
