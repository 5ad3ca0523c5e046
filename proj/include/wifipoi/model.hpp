#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wifipoi {

/// Epoch seconds (UTC).
using Timestamp = std::int64_t;

/// 48-bit hardware address of an access point. Canonical text form is
/// lowercase, colon separated: "aa:bb:cc:dd:ee:ff".
class MacAddress {
 public:
  using Octets = std::array<std::uint8_t, 6>;

  constexpr MacAddress() = default;
  constexpr explicit MacAddress(const Octets& octets) : octets_(octets) {}

  /// Accepts ':' or '-' separators and either case.
  static MacAddress parse(std::string_view text);

  /// Builds a locally administered address from a 40-bit counter; used by the
  /// simulator and tests to mint unique addresses.
  static MacAddress from_index(std::uint64_t index);

  std::string str() const;
  const Octets& octets() const noexcept { return octets_; }

  friend constexpr auto operator<=>(const MacAddress&, const MacAddress&) = default;

 private:
  Octets octets_{};
};

MacAddress parse_mac(std::string_view text);

/// RSS is integer dBm and valid in [-100, 0).
inline constexpr int kMinRssi = -100;
inline constexpr int kMaxRssiExclusive = 0;

constexpr bool is_valid_rssi(int dbm) noexcept {
  return dbm >= kMinRssi && dbm < kMaxRssiExclusive;
}

struct Observation {
  MacAddress mac;
  int rssi = 0;  // dBm

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// One Wi-Fi scan. After validation observations are sorted by MAC and
/// unique.
struct ScanResult {
  Timestamp timestamp = 0;
  std::vector<Observation> observations;

  friend bool operator==(const ScanResult&, const ScanResult&) = default;
};

/// Time-ordered scans of one user's device.
struct ScanLog {
  std::string user;
  std::string device;
  std::vector<ScanResult> entries;

  friend bool operator==(const ScanLog&, const ScanLog&) = default;
};

/// Drops out-of-range RSS readings (counted in `dropped`), collapses duplicate
/// MACs keeping the strongest reading and sorts by MAC.
/// Throws EmptyScan when nothing survives.
ScanResult validate_scan(const ScanResult& raw, std::size_t& dropped);
ScanResult validate_scan(const ScanResult& raw);

/// Stable-sorts entries by timestamp and removes repeated timestamps (first
/// occurrence wins).
void normalize_log(ScanLog& log);

struct FingerprintEntry {
  MacAddress mac;
  double mean_rssi = 0.0;
  std::size_t count = 0;

  friend bool operator==(const FingerprintEntry&, const FingerprintEntry&) = default;
};

/// MAC -> mean RSS map characterising a place, iterated in MAC order.
class Fingerprint {
 public:
  Fingerprint() = default;

  /// Entries may arrive in any order; duplicate MACs are rejected.
  explicit Fingerprint(std::vector<FingerprintEntry> entries);

  /// Single-scan fingerprint: every observation with count 1.
  static Fingerprint from_scan(const ScanResult& scan);

  std::span<const FingerprintEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const FingerprintEntry* find(const MacAddress& mac) const;

  /// Total number of observations folded into this fingerprint.
  std::size_t total_count() const noexcept;

  /// Observation-count weighted union of two fingerprints.
  Fingerprint merged_with(const Fingerprint& other) const;

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

 private:
  std::vector<FingerprintEntry> entries_;
};

struct ClusterParams {
  double epsilon = 0.5;
  std::size_t min_pts = 4;
  Timestamp scan_interval = 300;

  /// Throws InvalidParams unless 0 < epsilon <= 1, min_pts >= 2 and
  /// scan_interval > 0.
  void validate() const;
};

}  // namespace wifipoi
