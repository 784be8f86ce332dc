#include "fedgate/error.hpp"

namespace fedgate {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDirective:
      return "MalformedDirective";
    case ErrorCode::kEmptyStatement:
      return "EmptyStatement";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kDuplicatePrefix:
      return "DuplicatePrefix";
    case ErrorCode::kConflictingMount:
      return "ConflictingMount";
    case ErrorCode::kInvalidRule:
      return "InvalidRule";
    case ErrorCode::kUnresolvablePath:
      return "UnresolvablePath";
    case ErrorCode::kReplicaExists:
      return "ReplicaExists";
    case ErrorCode::kUnknownDataset:
      return "UnknownDataset";
    case ErrorCode::kUnknownZone:
      return "UnknownZone";
    case ErrorCode::kDuplicateZone:
      return "DuplicateZone";
    case ErrorCode::kZoneMismatch:
      return "ZoneMismatch";
    case ErrorCode::kDuplicateCluster:
      return "DuplicateCluster";
    case ErrorCode::kInvalidDescriptor:
      return "InvalidDescriptor";
    case ErrorCode::kUnknownCluster:
      return "UnknownCluster";
    case ErrorCode::kNoEligibleZone:
      return "NoEligibleZone";
    case ErrorCode::kNoAvailableCluster:
      return "NoAvailableCluster";
    case ErrorCode::kInvalidPolicy:
      return "InvalidPolicy";
    case ErrorCode::kInvalidMixture:
      return "InvalidMixture";
    case ErrorCode::kClusterUnreachable:
      return "ClusterUnreachable";
    case ErrorCode::kClusterLost:
      return "ClusterLost";
    case ErrorCode::kMemoryExceeded:
      return "MemoryExceeded";
    case ErrorCode::kNotFound:
      return "NotFound";
    case ErrorCode::kInvalidConfig:
      return "InvalidConfig";
    case ErrorCode::kInvalidSpec:
      return "InvalidSpec";
    case ErrorCode::kIoError:
      return "IoError";
    case ErrorCode::kGatewayUnreachable:
      return "GatewayUnreachable";
    case ErrorCode::kMissingField:
      return "MissingField";
    case ErrorCode::kInvalidValue:
      return "InvalidValue";
  }
  return "Unknown";
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDirective:
    case ErrorCode::kEmptyStatement:
    case ErrorCode::kParseError:
    case ErrorCode::kInvalidDescriptor:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kMissingField:
    case ErrorCode::kInvalidValue:
    case ErrorCode::kInvalidRule:
    case ErrorCode::kInvalidPolicy:
    case ErrorCode::kInvalidMixture:
    case ErrorCode::kZoneMismatch:
      return 400;
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownCluster:
    case ErrorCode::kUnknownDataset:
    case ErrorCode::kUnknownZone:
      return 404;
    case ErrorCode::kDuplicateCluster:
    case ErrorCode::kDuplicatePrefix:
    case ErrorCode::kConflictingMount:
    case ErrorCode::kReplicaExists:
    case ErrorCode::kDuplicateZone:
      return 409;
    case ErrorCode::kNoEligibleZone:
    case ErrorCode::kNoAvailableCluster:
    case ErrorCode::kClusterUnreachable:
    case ErrorCode::kClusterLost:
    case ErrorCode::kGatewayUnreachable:
      return 503;
    case ErrorCode::kUnresolvablePath:
    case ErrorCode::kMemoryExceeded:
    case ErrorCode::kIoError:
      return 500;
  }
  return 500;
}

std::optional<ErrorCode> error_code_from_name(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kInvalidValue); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    if (error_code_name(code) == name) {
      return code;
    }
  }
  return std::nullopt;
}

} // namespace fedgate
