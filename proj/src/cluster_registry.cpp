#include "fedgate/cluster_registry.hpp"

#include <algorithm>
#include <stdexcept>

#include "fedgate/error.hpp"

namespace fedgate::cluster {

void validate(const ClusterDescriptor& desc) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInvalidDescriptor,
                "cluster '" + desc.id + "': " + why);
  };
  if (desc.id.empty()) {
    fail("id is empty");
  }
  if (desc.zone.empty()) {
    fail("zone is empty");
  }
  if (desc.catalogs.empty()) {
    fail("at least one catalog is required");
  }
  if (desc.worker_count < 1) {
    fail("worker_count must be >= 1");
  }
  if (desc.memory_per_worker_bytes == 0) {
    fail("memory_per_worker_bytes must be positive");
  }
}

std::string_view to_string(ClusterState state) {
  return state == ClusterState::kOnline ? "ONLINE" : "OFFLINE";
}

const ClusterView* RegistrySnapshot::find(std::string_view id) const {
  for (const auto& v : *views_) {
    if (v.descriptor.id == id) {
      return &v;
    }
  }
  return nullptr;
}

ClusterRegistry::ClusterRegistry(ProbeSettings settings)
    : settings_(settings),
      published_(std::make_shared<const std::vector<ClusterView>>()) {
  if (settings_.failure_threshold < 1 || settings_.interval.count() <= 0) {
    throw Error(ErrorCode::kInvalidConfig,
                "probe failure_threshold must be >= 1 and interval > 0");
  }
}

ClusterView* ClusterRegistry::find_locked(std::string_view id) {
  for (auto& v : clusters_) {
    if (v.descriptor.id == id) {
      return &v;
    }
  }
  return nullptr;
}

void ClusterRegistry::publish_locked() {
  published_ = std::make_shared<const std::vector<ClusterView>>(clusters_);
  ++version_;
}

void ClusterRegistry::register_cluster(ClusterDescriptor desc) {
  validate(desc);
  std::lock_guard lock(mu_);
  if (find_locked(desc.id) != nullptr) {
    throw Error(ErrorCode::kDuplicateCluster,
                "cluster already registered: " + desc.id);
  }
  clusters_.push_back({std::move(desc), {}, {}});
  publish_locked();
}

void ClusterRegistry::deregister_cluster(std::string_view id) {
  std::lock_guard lock(mu_);
  auto it = std::find_if(clusters_.begin(), clusters_.end(),
                         [&](const ClusterView& v) { return v.id() == id; });
  if (it == clusters_.end()) {
    throw Error(ErrorCode::kUnknownCluster, "unknown cluster: " + std::string(id));
  }
  clusters_.erase(it);
  publish_locked();
}

std::vector<StateTransition> ClusterRegistry::probe_all(const Prober& prober,
                                                        Seconds now) {
  std::vector<ClusterDescriptor> targets;
  {
    std::lock_guard lock(mu_);
    for (const auto& v : clusters_) {
      targets.push_back(v.descriptor);
    }
  }
  // Probe without holding the lock; results are applied afterwards.
  std::vector<std::pair<std::string, bool>> results;
  results.reserve(targets.size());
  for (const auto& desc : targets) {
    bool ok = false;
    try {
      ok = prober(desc);
    } catch (...) {
      ok = false;
    }
    results.emplace_back(desc.id, ok);
  }

  std::vector<StateTransition> transitions;
  std::lock_guard lock(mu_);
  for (const auto& [id, ok] : results) {
    ClusterView* view = find_locked(id);
    if (view == nullptr) {
      continue; // deregistered while probing
    }
    ClusterStatus& st = view->status;
    const ClusterState before = st.state;
    st.last_probe_time = now;
    if (ok) {
      st.consecutive_probe_failures = 0;
      st.state = ClusterState::kOnline;
    } else {
      ++st.consecutive_probe_failures;
      if (st.consecutive_probe_failures >= settings_.failure_threshold) {
        st.state = ClusterState::kOffline;
      }
    }
    if (st.state != before) {
      transitions.push_back({id, before, st.state, now});
    }
  }
  publish_locked();
  return transitions;
}

RegistrySnapshot ClusterRegistry::snapshot() const {
  std::lock_guard lock(mu_);
  return RegistrySnapshot(published_, version_);
}

void ClusterRegistry::record_dispatch(std::string_view id,
                                      std::uint64_t memory_bytes) {
  std::lock_guard lock(mu_);
  ClusterView* view = find_locked(id);
  if (view == nullptr) {
    throw Error(ErrorCode::kUnknownCluster, "unknown cluster: " + std::string(id));
  }
  ++view->load.running_queries;
  view->load.committed_memory_bytes += memory_bytes;
  publish_locked();
}

void ClusterRegistry::record_release(std::string_view id,
                                     std::uint64_t memory_bytes) {
  std::lock_guard lock(mu_);
  ClusterView* view = find_locked(id);
  if (view == nullptr) {
    return;
  }
  if (view->load.running_queries <= 0 ||
      view->load.committed_memory_bytes < memory_bytes) {
    throw std::logic_error("load release without matching dispatch on " +
                           std::string(id));
  }
  --view->load.running_queries;
  view->load.committed_memory_bytes -= memory_bytes;
  publish_locked();
}

} // namespace fedgate::cluster
