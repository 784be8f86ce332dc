#pragma once

#include <cstdint>
#include <memory>
#include <string_view>

#include "fedgate/sql_frontend.hpp"

namespace fedgate::storage {
class StorageFederation;
}

namespace fedgate::cost {

/// 1TB, the peak-memory line between light and heavy queries.
inline constexpr std::uint64_t kDefaultHeavyThresholdBytes = 1'000'000'000'000ULL;

struct QueryFeatures {
  sql::StatementClass statement_class = sql::StatementClass::kOther;
  int table_count = 0;
  int join_count = 0;
  int aggregate_count = 0;
  /// Sum of catalog sizes of the referenced tables; unknown tables add 0.
  std::uint64_t input_bytes = 0;
};

struct CostEstimate {
  double cpu_seconds = 0.0;
  std::uint64_t peak_memory_bytes = 0;
};

enum class ResourceClass { kLight, kHeavy };

std::string_view to_string(ResourceClass cls);

QueryFeatures extract_features(const sql::ParsedQuery& query,
                               const storage::StorageFederation& catalog);

/// Strategy behind predict(); an ML model can replace the heuristic.
class CostModel {
 public:
  virtual ~CostModel() = default;
  virtual CostEstimate predict(const QueryFeatures& features) const = 0;
};

/// peak memory = input * (1 + 0.5 joins) * (1 + 0.25 aggregates)
/// cpu seconds = input / (100 MiB/s) * (1 + joins)
class HeuristicCostModel final : public CostModel {
 public:
  CostEstimate predict(const QueryFeatures& features) const override;
};

CostEstimate predict(const QueryFeatures& features);

ResourceClass classify(const CostEstimate& estimate,
                       std::uint64_t heavy_threshold_bytes =
                           kDefaultHeavyThresholdBytes);

} // namespace fedgate::cost
