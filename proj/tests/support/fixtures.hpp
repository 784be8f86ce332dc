#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "fedgate/cluster_registry.hpp"
#include "fedgate/config.hpp"
#include "fedgate/error.hpp"
#include "fedgate/storage_federation.hpp"

namespace fedgate::testing {

/// Zones, mounts and the regex rule of the partly-cloudy storage example.
inline std::unique_ptr<storage::StorageFederation> partly_cloudy_federation() {
  auto fed = std::make_unique<storage::StorageFederation>();
  fed->add_zone({"datacenter-1", storage::ZoneKind::kOnprem});
  fed->add_zone({"cloud", storage::ZoneKind::kCloud});
  fed->add_mount_rule({"hdfs://cluster-X-nn:8020/logs",
                       "/DataCenter-1/cluster-X/logs", "datacenter-1"});
  fed->add_mount_rule({"viewfs://cluster-X/logs", "/DataCenter-1/cluster-X/logs",
                       "datacenter-1"});
  fed->add_regex_rule(
      {R"(gs://(?<ns>[^.]+)\.(?<ds>.+))", "/gcs/{ns}/{ds}", "cloud"});
  return fed;
}

inline cluster::ClusterDescriptor descriptor(
    std::string id, std::string zone,
    std::set<std::string> catalogs = {"hive"}, int workers = 4,
    std::uint64_t memory_per_worker = 64ULL << 30) {
  return {id, std::move(zone), "http://" + id + ":8080", std::move(catalogs),
          workers, memory_per_worker};
}

inline std::string random_segments(std::mt19937_64& rng, int max_segments) {
  static const std::vector<std::string> kSegments = {"a", "b", "logs", "x1",
                                                     "partly-cloudy", "d=2"};
  std::string out;
  const int n = static_cast<int>(rng() % (max_segments + 1));
  for (int i = 0; i < n; ++i) {
    out += "/" + kSegments[rng() % kSegments.size()];
  }
  return out;
}

inline std::string random_suffix(std::mt19937_64& rng) {
  return random_segments(rng, 4);
}

/// Registers 1-8 mount rules with possibly nested physical prefixes and
/// distinct, non-nested unified prefixes. Returns the rules registered.
inline std::vector<storage::MountRule> random_mount_table(
    std::mt19937_64& rng, storage::StorageFederation& fed) {
  static const std::vector<std::string> kRoots = {
      "hdfs://cluster-X-nn:8020", "hdfs://cluster-Y-nn:8020",
      "viewfs://cluster-X", "gs://bucket"};
  fed.add_zone({"dc", storage::ZoneKind::kOnprem});
  fed.add_zone({"cloud", storage::ZoneKind::kCloud});
  std::vector<storage::MountRule> added;
  const int n = 1 + static_cast<int>(rng() % 8);
  for (int i = 0; i < n; ++i) {
    storage::MountRule rule{
        kRoots[rng() % kRoots.size()] + random_segments(rng, 3),
        "/u" + std::to_string(i) + random_segments(rng, 2),
        rng() % 2 ? "dc" : "cloud"};
    try {
      fed.add_mount_rule(rule);
      added.push_back(rule);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDuplicatePrefix) {
        throw;
      }
    }
  }
  return added;
}

/// Two zones, partly_cloudy replicated in both, onprem_only and
/// cloud_only in one each. Clusters: dc-a in datacenter-1, cloud-a and
/// cloud-b in cloud (cloud-b also serves mysql).
inline config::GatewayConfig gateway_config(
    routing::PolicyKind policy = routing::PolicyKind::kRoundRobin) {
  config::GatewayConfig c;
  c.zones = {{"datacenter-1", storage::ZoneKind::kOnprem},
             {"cloud", storage::ZoneKind::kCloud}};
  c.mounts = {{"hdfs://cluster-X-nn:8020/logs", "/DataCenter-1/cluster-X/logs",
               "datacenter-1"}};
  c.regex_rules = {{R"(gs://(?<ns>[^.]+)\.(?<ds>.+))", "/gcs/{ns}/{ds}", "cloud"}};
  c.datasets = {
      {"logs.partly_cloudy", 10ULL << 30,
       {{"datacenter-1", "hdfs://cluster-X-nn:8020/logs/partly-cloudy"},
        {"cloud", "gs://logs.partly-cloudy"}}},
      {"logs.onprem_only", 1ULL << 30,
       {{"datacenter-1", "hdfs://cluster-X-nn:8020/logs/onprem-only"}}},
      {"logs.cloud_only", 1ULL << 30, {{"cloud", "gs://logs.cloud-only"}}},
  };
  c.clusters = {descriptor("dc-a", "datacenter-1"), descriptor("cloud-a", "cloud"),
                descriptor("cloud-b", "cloud", {"hive", "mysql"})};
  c.policy.kind = policy;
  c.policy.heavy_cluster_ids = {"cloud-b"};
  c.seed = 3;
  c.policy.seed = 3;
  return c;
}

} // namespace fedgate::testing
