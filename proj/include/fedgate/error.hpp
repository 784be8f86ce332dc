#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fedgate {

enum class ErrorCode {
  // sql frontend
  kMalformedDirective,
  kEmptyStatement,
  kParseError,
  // storage federation
  kDuplicatePrefix,
  kConflictingMount,
  kInvalidRule,
  kUnresolvablePath,
  kReplicaExists,
  kUnknownDataset,
  kUnknownZone,
  kDuplicateZone,
  kZoneMismatch,
  // cluster registry / routing
  kDuplicateCluster,
  kInvalidDescriptor,
  kUnknownCluster,
  kNoEligibleZone,
  kNoAvailableCluster,
  kInvalidPolicy,
  // simulator
  kInvalidMixture,
  kClusterUnreachable,
  kClusterLost,
  kMemoryExceeded,
  // gateway / cli
  kNotFound,
  kInvalidConfig,
  kInvalidSpec,
  kIoError,
  kGatewayUnreachable,
  // deploy spec
  kMissingField,
  kInvalidValue,
};

/// Stable identifier used in logs, HTTP error bodies and the CLI.
std::string_view error_code_name(ErrorCode code);

std::optional<ErrorCode> error_code_from_name(std::string_view name);

/// HTTP status class for a failed request with this code.
int http_status_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Tokenizer/extractor failure at a byte offset of the input.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error(ErrorCode::kParseError,
              message + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

} // namespace fedgate
