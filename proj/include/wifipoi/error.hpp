#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wifipoi {

enum class ErrorCode {
  // model
  MalformedMac,
  EmptyScan,
  InvalidParams,
  // similarity
  EmptyFingerprint,
  TooFewFingerprints,
  // clustering
  EmptyLog,
  LabelLengthMismatch,
  // registry
  EmptyCluster,
  StorageFailure,
  UnknownUser,
  // community
  TooFewNodes,
  PartitionMismatch,
  EmptyGraph,
  // ingest
  MalformedLine,
  RssiOutOfRange,
  CorruptStream,
  // simgen
  ZeroDistance,
  UnknownPlace,
  InvalidItinerary,
  // configuration / files
  ConfigParse,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Whether the error stems from bad input (files, flags, formats) rather than
/// from the state of the data being analysed. Drives the CLI exit code.
bool is_input_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  /// 1-based line number for codec errors, when known.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace wifipoi
