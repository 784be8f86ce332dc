#include "fedgate/cost_predictor.hpp"

#include <cmath>
#include <limits>

#include "fedgate/storage_federation.hpp"

namespace fedgate::cost {

namespace {

constexpr long double kScanBytesPerSecond = 100.0L * 1024 * 1024;

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  const auto max = std::numeric_limits<std::uint64_t>::max();
  return a > max - b ? max : a + b;
}

std::uint64_t to_bytes(long double v) {
  constexpr auto kMax =
      static_cast<long double>(std::numeric_limits<std::uint64_t>::max());
  if (!(v > 0)) {
    return 0;
  }
  if (v >= kMax) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(std::llroundl(v));
}

} // namespace

std::string_view to_string(ResourceClass cls) {
  return cls == ResourceClass::kHeavy ? "HEAVY" : "LIGHT";
}

QueryFeatures extract_features(const sql::ParsedQuery& query,
                               const storage::StorageFederation& catalog) {
  QueryFeatures f;
  f.statement_class = query.statement_class;
  f.table_count = static_cast<int>(query.tables.size());
  f.join_count = query.join_count;
  f.aggregate_count = query.aggregate_count;
  for (const auto& table : query.tables) {
    if (auto entry = catalog.find_table(table)) {
      f.input_bytes = saturating_add(f.input_bytes, entry->size_bytes);
    }
  }
  return f;
}

CostEstimate HeuristicCostModel::predict(const QueryFeatures& f) const {
  const long double input = static_cast<long double>(f.input_bytes);
  const long double joins = f.join_count;
  const long double aggs = f.aggregate_count;
  CostEstimate e;
  e.peak_memory_bytes = to_bytes(input * (1 + 0.5L * joins) * (1 + 0.25L * aggs));
  e.cpu_seconds =
      static_cast<double>(input / kScanBytesPerSecond * (1 + joins));
  return e;
}

CostEstimate predict(const QueryFeatures& features) {
  return HeuristicCostModel().predict(features);
}

ResourceClass classify(const CostEstimate& estimate,
                       std::uint64_t heavy_threshold_bytes) {
  return estimate.peak_memory_bytes >= heavy_threshold_bytes
      ? ResourceClass::kHeavy
      : ResourceClass::kLight;
}

} // namespace fedgate::cost
