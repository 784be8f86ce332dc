#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "fedgate/sql_frontend.hpp"

namespace fedgate::storage {

enum class ZoneKind { kOnprem, kCloud };

std::string_view to_string(ZoneKind kind);
std::optional<ZoneKind> zone_kind_from_string(std::string_view s);

struct Zone {
  std::string name;
  ZoneKind kind = ZoneKind::kOnprem;

  friend bool operator==(const Zone&, const Zone&) = default;
};

/// Maps every URI under `physical_prefix` to the same suffix under
/// `unified_prefix`. Matching is on path-segment boundaries.
struct MountRule {
  std::string physical_prefix;
  std::string unified_prefix;
  std::string zone;
};

/// Maps URIs matched in full by `pattern` to `unified_template`, where
/// `{name}` expands to the named capture `(?<name>...)`.
struct RegexRule {
  std::string pattern;
  std::string unified_template;
  std::string zone;
};

struct Resolution {
  std::string unified_path;
  std::string zone;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

struct Replica {
  std::string zone;
  std::string physical_uri;
  std::string unified_path;
};

struct DatasetCatalogEntry {
  std::string dataset;
  std::vector<Replica> replicas; // in registration order
  std::uint64_t size_bytes = 0;
};

/// Mount table, regex rules and dataset catalog behind one reader-writer
/// lock. Every public operation is atomic.
///
/// Mount rules win over regex rules; among mount rules the longest matching
/// physical prefix wins; regex rules are tried in registration order.
/// Several mount rules may share one unified prefix (e.g. an hdfs:// and a
/// viewfs:// spelling of the same namespace); the first registered is the
/// canonical target of resolve_unified. Unified prefixes of different rules
/// may not nest.
class StorageFederation {
 public:
  StorageFederation();
  ~StorageFederation();
  StorageFederation(const StorageFederation&) = delete;
  StorageFederation& operator=(const StorageFederation&) = delete;

  void add_zone(Zone zone);
  std::vector<Zone> zones() const;
  std::optional<Zone> find_zone(std::string_view name) const;

  void add_mount_rule(MountRule rule);
  void add_regex_rule(RegexRule rule);

  Resolution resolve_physical(std::string_view uri) const;
  std::string resolve_unified(std::string_view path) const;

  /// Records a replica and its resolved unified path. The stored physical
  /// URI is the canonical spelling (the one resolve_unified returns).
  void register_replica(std::string_view dataset, std::string_view zone,
                        std::string_view physical_uri, std::uint64_t size_bytes);

  /// Zone names holding a replica; empty for unknown datasets.
  std::set<std::string> locate(std::string_view dataset) const;

  /// Local replica if the requester's zone has one, otherwise the first
  /// cloud replica, otherwise the first replica.
  Resolution nearest_replica(std::string_view dataset,
                             std::string_view requester_zone) const;

  std::optional<DatasetCatalogEntry> find_dataset(std::string_view dataset) const;

  /// Catalog entry for a table reference: the full name first, then the
  /// name without its catalog part.
  std::optional<DatasetCatalogEntry> find_table(const sql::TableRef& ref) const;

  std::vector<DatasetCatalogEntry> datasets() const;

 private:
  struct CompiledRegexRule;

  Resolution resolve_physical_locked(std::string_view uri) const;
  std::string resolve_unified_locked(std::string_view path) const;
  const DatasetCatalogEntry* find_dataset_locked(std::string_view dataset) const;
  void require_zone_locked(std::string_view zone) const;

  mutable std::shared_mutex mu_;
  std::vector<Zone> zones_;
  std::vector<MountRule> mounts_;
  std::vector<std::unique_ptr<CompiledRegexRule>> regex_rules_;
  std::vector<DatasetCatalogEntry> catalog_;
};

} // namespace fedgate::storage
