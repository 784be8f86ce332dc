#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedgate/cluster_registry.hpp"
#include "fedgate/engine_simulator.hpp"
#include "fedgate/router.hpp"
#include "fedgate/storage_federation.hpp"
#include "json.hpp"

namespace fedgate::config {

struct DatasetReplicaConfig {
  std::string zone;
  std::string uri;
};

struct DatasetConfig {
  std::string name;
  std::uint64_t size_bytes = 0;
  std::vector<DatasetReplicaConfig> replicas;
};

/// Everything a gateway needs, as read from its JSON config file.
struct GatewayConfig {
  std::vector<storage::Zone> zones;
  std::vector<cluster::ClusterDescriptor> clusters;
  std::vector<storage::MountRule> mounts;
  std::vector<storage::RegexRule> regex_rules;
  std::vector<DatasetConfig> datasets;
  routing::PolicyConfig policy;
  cluster::ProbeSettings probe;
  sim::WorkloadMixture mixture;
  sim::SimSettings sim;
  std::uint64_t seed = 0;
  std::string log_path;
};

/// Throws InvalidConfig naming the offending key.
GatewayConfig parse_config(const nlohmann::json& doc);
GatewayConfig load_config_file(const std::string& path);
nlohmann::json to_json(const GatewayConfig& config);

/// FEDGATE_CONFIG when set, else `fallback`.
std::string config_path_from_env(const std::string& fallback);

/// Zones, mounts, regex rules and datasets, in that order.
void populate(storage::StorageFederation& catalog, const GatewayConfig& config);

nlohmann::json to_json(const cluster::ClusterDescriptor& desc);
/// Throws InvalidDescriptor.
cluster::ClusterDescriptor descriptor_from_json(const nlohmann::json& j);

} // namespace fedgate::config
