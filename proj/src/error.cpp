#include "wifipoi/error.hpp"

namespace wifipoi {
namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> line) {
  std::string out(to_string(code));
  if (line) {
    out += " at line " + std::to_string(*line);
  }
  if (!message.empty()) {
    out += ": " + message;
  }
  return out;
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedMac: return "MalformedMac";
    case ErrorCode::EmptyScan: return "EmptyScan";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::EmptyFingerprint: return "EmptyFingerprint";
    case ErrorCode::TooFewFingerprints: return "TooFewFingerprints";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::LabelLengthMismatch: return "LabelLengthMismatch";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::TooFewNodes: return "TooFewNodes";
    case ErrorCode::PartitionMismatch: return "PartitionMismatch";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::RssiOutOfRange: return "RssiOutOfRange";
    case ErrorCode::CorruptStream: return "CorruptStream";
    case ErrorCode::ZeroDistance: return "ZeroDistance";
    case ErrorCode::UnknownPlace: return "UnknownPlace";
    case ErrorCode::InvalidItinerary: return "InvalidItinerary";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedMac:
    case ErrorCode::MalformedLine:
    case ErrorCode::RssiOutOfRange:
    case ErrorCode::CorruptStream:
    case ErrorCode::ConfigParse:
    case ErrorCode::InvalidParams:
    case ErrorCode::UnknownPlace:
    case ErrorCode::InvalidItinerary:
    case ErrorCode::Io:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, message, line)),
      code_(code),
      line_(line) {}

}  // namespace wifipoi
