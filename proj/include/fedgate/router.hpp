#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedgate/cluster_registry.hpp"
#include "fedgate/cost_predictor.hpp"
#include "fedgate/sql_frontend.hpp"

namespace fedgate::storage {
class StorageFederation;
}

namespace fedgate::routing {

enum class PolicyKind { kRoundRobin, kRandom, kLeastLoaded, kCostBased };

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> policy_kind_from_string(std::string_view s);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kRoundRobin;
  std::uint64_t seed = 0;                  // RANDOM
  std::set<std::string> heavy_cluster_ids; // COST_BASED
  std::uint64_t heavy_threshold_bytes = cost::kDefaultHeavyThresholdBytes;
};

/// COST_BASED needs heavy clusters that exist in the registry.
void validate(const PolicyConfig& config, const cluster::RegistrySnapshot& snap);

using Candidates = std::vector<const cluster::ClusterView*>;

class RoutingPolicy {
 public:
  virtual ~RoutingPolicy() = default;
  virtual PolicyKind kind() const = 0;
  /// Picks one of `candidates` (non-empty). Appends its reasoning to
  /// `trace`.
  virtual const cluster::ClusterView& choose(const Candidates& candidates,
                                             const cost::CostEstimate& estimate,
                                             std::vector<std::string>& trace) = 0;
};

/// Shared counter modulo the candidate count.
class RoundRobinPolicy final : public RoutingPolicy {
 public:
  PolicyKind kind() const override { return PolicyKind::kRoundRobin; }
  const cluster::ClusterView& choose(const Candidates& candidates,
                                     const cost::CostEstimate& estimate,
                                     std::vector<std::string>& trace) override;

 private:
  std::atomic<std::uint64_t> counter_{0};
};

class RandomPolicy final : public RoutingPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  PolicyKind kind() const override { return PolicyKind::kRandom; }
  const cluster::ClusterView& choose(const Candidates& candidates,
                                     const cost::CostEstimate& estimate,
                                     std::vector<std::string>& trace) override;

 private:
  std::mutex mu_;
  std::mt19937_64 rng_;
};

/// Fewest running queries; ties go to the lexicographically smallest id.
class LeastLoadedPolicy final : public RoutingPolicy {
 public:
  PolicyKind kind() const override { return PolicyKind::kLeastLoaded; }
  const cluster::ClusterView& choose(const Candidates& candidates,
                                     const cost::CostEstimate& estimate,
                                     std::vector<std::string>& trace) override;
};

/// Heavy queries go to the dedicated heavy clusters, light queries stay off
/// them; least-loaded within the restricted set. Either restriction falls
/// back to all candidates when it would leave nothing.
class CostBasedPolicy final : public RoutingPolicy {
 public:
  CostBasedPolicy(std::set<std::string> heavy_cluster_ids,
                  std::uint64_t heavy_threshold_bytes)
      : heavy_(std::move(heavy_cluster_ids)),
        threshold_(heavy_threshold_bytes) {}
  PolicyKind kind() const override { return PolicyKind::kCostBased; }
  const cluster::ClusterView& choose(const Candidates& candidates,
                                     const cost::CostEstimate& estimate,
                                     std::vector<std::string>& trace) override;

 private:
  std::set<std::string> heavy_;
  std::uint64_t threshold_;
  LeastLoadedPolicy least_loaded_;
};

std::unique_ptr<RoutingPolicy> make_policy(const PolicyConfig& config);

/// Zones where every storage-backed table of `query` has a replica, narrowed
/// by the query's zone directive. When the tables leave both on-prem and
/// cloud zones, only the cloud ones remain. Tables missing from the catalog
/// are external and do not constrain zones. Throws NoEligibleZone.
std::set<std::string> eligible_zones(const sql::ParsedQuery& query,
                                     const storage::StorageFederation& catalog,
                                     std::vector<std::string>* trace = nullptr);

/// Catalog names the query spells out explicitly (the `hive` in
/// hive.logs.t).
std::set<std::string> required_catalogs(const sql::ParsedQuery& query);

/// ONLINE clusters in `zones` serving all `required` catalogs, in snapshot
/// order, minus `exclude`. Throws NoAvailableCluster.
Candidates candidates(const std::set<std::string>& zones,
                      const std::set<std::string>& required,
                      const cluster::RegistrySnapshot& snap,
                      const std::set<std::string>& exclude = {},
                      std::vector<std::string>* trace = nullptr);

struct RoutingDecision {
  std::string cluster_id;
  std::string zone;
  std::vector<std::string> reason;
};

RoutingDecision route(const sql::ParsedQuery& query, RoutingPolicy& policy,
                      const cluster::RegistrySnapshot& snap,
                      const cost::CostEstimate& estimate,
                      const storage::StorageFederation& catalog,
                      const std::set<std::string>& exclude = {});

} // namespace fedgate::routing
