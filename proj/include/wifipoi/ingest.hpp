#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wifipoi/model.hpp"
#include "wifipoi/timeutil.hpp"

namespace wifipoi {

// Scan-log wire format: one scan per line,
//   {"t":<epoch>,"dev":"<device>","aps":[["<mac>",<rssi>],...]}\n
// in exactly that key order with no whitespace, MACs canonical and sorted.

std::string encode_log(const ScanLog& log);

/// Inverse of encode_log. Blank lines are skipped; anything else that does
/// not match the format throws MalformedLine, MalformedMac or RssiOutOfRange
/// with the 1-based line number. Entries are normalised (time order, repeated
/// timestamps dropped, duplicate MACs collapsed to the strongest reading).
/// The user is not part of the wire format and is supplied by the caller.
ScanLog decode_log(std::string_view bytes, std::string user = {});

/// Single gzip member (RFC 1952).
std::string compress_batch(std::string_view bytes);
/// Accepts concatenated members. Throws CorruptStream.
std::string decompress_batch(std::string_view bytes);

bool looks_gzipped(std::string_view bytes) noexcept;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Reads a `.scan` or `.scan.gz` file (gzip detected by magic bytes).
ScanLog load_scan_file(const std::filesystem::path& path, std::string user);

/// "alice.scan.gz" -> "alice".
std::string user_from_filename(const std::filesystem::path& path);

struct IngestReport {
  std::size_t added = 0;
  std::size_t skipped = 0;
};

/// Append-only raw observation table keyed by (user, t, mac).
class RawStore {
 public:
  using FaultHook = std::function<void(std::string_view checkpoint)>;

  /// ":memory:" gives a private in-memory store.
  explicit RawStore(const std::string& path);
  ~RawStore();
  RawStore(RawStore&&) noexcept;
  RawStore& operator=(RawStore&&) noexcept;

  /// Appends observation rows in one transaction; rows whose key already
  /// exists are skipped and counted. Throws StorageFailure.
  IngestReport store_raw(const ScanLog& log);

  /// Reassembles a user's scans, optionally restricted to a window.
  ScanLog load_log(std::string_view user, std::optional<DayWindow> window = std::nullopt) const;

  std::vector<std::string> users() const;
  bool has_user(std::string_view user) const;
  std::size_t row_count() const;

  /// CSV `user,t,mac,rssi`, ordered by key.
  void export_csv(std::ostream& out) const;

  void set_fault_hook(FaultHook hook);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// A slice of a log as uploaded by the device.
struct RawBatch {
  std::string device;
  ScanLog fragment;
  Timestamp span_begin = 0;  // inclusive
  Timestamp span_end = 0;    // exclusive, span_end - span_begin == period
  Timestamp upload_at = 0;   // upload slot actually used

  /// gzip-compressed encode_log(fragment).
  std::string payload() const;
};

inline constexpr Timestamp kDefaultUploadPeriod = 21600;

/// Cuts the log into windows of `period` seconds aligned to its first scan.
/// Windows without scans produce no batch. `wifi_available[k]` tells whether
/// the device is connected at the end of window k; when it is not, the batch
/// waits for the next connected slot (slots beyond the mask are connected).
std::vector<RawBatch> plan_uploads(const ScanLog& log, Timestamp period = kDefaultUploadPeriod,
                                   std::span<const bool> wifi_available = {});

}  // namespace wifipoi
