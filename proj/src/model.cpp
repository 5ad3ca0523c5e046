#include "wifipoi/model.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "wifipoi/error.hpp"

namespace wifipoi {
namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

MacAddress MacAddress::parse(std::string_view text) {
  constexpr std::size_t kCanonicalLength = 17;
  if (text.size() != kCanonicalLength) {
    throw Error(ErrorCode::MalformedMac,
                "expected 6 hex octets, got '" + std::string(text) + "'");
  }
  Octets octets{};
  for (std::size_t i = 0; i < octets.size(); ++i) {
    const std::size_t at = i * 3;
    const int hi = hex_value(text[at]);
    const int lo = hex_value(text[at + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::MalformedMac,
                  "non-hex character in '" + std::string(text) + "'");
    }
    if (i + 1 < octets.size() && text[at + 2] != ':' && text[at + 2] != '-') {
      throw Error(ErrorCode::MalformedMac,
                  "bad separator in '" + std::string(text) + "'");
    }
    octets[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return MacAddress(octets);
}

MacAddress MacAddress::from_index(std::uint64_t index) {
  Octets octets{};
  octets[0] = 0x02;
  for (int i = 5; i >= 1; --i) {
    octets[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(index & 0xff);
    index >>= 8;
  }
  return MacAddress(octets);
}

std::string MacAddress::str() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(17);
  for (std::size_t i = 0; i < octets_.size(); ++i) {
    if (i != 0) out.push_back(':');
    out.push_back(kDigits[octets_[i] >> 4]);
    out.push_back(kDigits[octets_[i] & 0x0f]);
  }
  return out;
}

MacAddress parse_mac(std::string_view text) { return MacAddress::parse(text); }

ScanResult validate_scan(const ScanResult& raw, std::size_t& dropped) {
  std::map<MacAddress, int> strongest;
  for (const auto& obs : raw.observations) {
    if (!is_valid_rssi(obs.rssi)) {
      ++dropped;
      continue;
    }
    auto [it, inserted] = strongest.try_emplace(obs.mac, obs.rssi);
    if (!inserted) it->second = std::max(it->second, obs.rssi);
  }
  if (strongest.empty()) {
    throw Error(ErrorCode::EmptyScan,
                "no valid observations at t=" + std::to_string(raw.timestamp));
  }
  ScanResult out;
  out.timestamp = raw.timestamp;
  out.observations.reserve(strongest.size());
  for (const auto& [mac, rssi] : strongest) out.observations.push_back({mac, rssi});
  return out;
}

ScanResult validate_scan(const ScanResult& raw) {
  std::size_t dropped = 0;
  return validate_scan(raw, dropped);
}

void normalize_log(ScanLog& log) {
  auto& entries = log.entries;
  std::stable_sort(entries.begin(), entries.end(),
                   [](const ScanResult& a, const ScanResult& b) {
                     return a.timestamp < b.timestamp;
                   });
  entries.erase(std::unique(entries.begin(), entries.end(),
                            [](const ScanResult& a, const ScanResult& b) {
                              return a.timestamp == b.timestamp;
                            }),
                entries.end());
}

Fingerprint::Fingerprint(std::vector<FingerprintEntry> entries)
    : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const auto& a, const auto& b) { return a.mac < b.mac; });
  const auto dup = std::adjacent_find(
      entries_.begin(), entries_.end(),
      [](const auto& a, const auto& b) { return a.mac == b.mac; });
  if (dup != entries_.end()) {
    throw Error(ErrorCode::InvalidParams,
                "duplicate MAC " + dup->mac.str() + " in fingerprint");
  }
}

Fingerprint Fingerprint::from_scan(const ScanResult& scan) {
  std::vector<FingerprintEntry> entries;
  entries.reserve(scan.observations.size());
  for (const auto& obs : scan.observations) {
    entries.push_back({obs.mac, static_cast<double>(obs.rssi), 1});
  }
  return Fingerprint(std::move(entries));
}

const FingerprintEntry* Fingerprint::find(const MacAddress& mac) const {
  const auto it = std::lower_bound(
      entries_.begin(), entries_.end(), mac,
      [](const FingerprintEntry& e, const MacAddress& m) { return e.mac < m; });
  return (it != entries_.end() && it->mac == mac) ? &*it : nullptr;
}

std::size_t Fingerprint::total_count() const noexcept {
  std::size_t total = 0;
  for (const auto& e : entries_) total += e.count;
  return total;
}

Fingerprint Fingerprint::merged_with(const Fingerprint& other) const {
  std::vector<FingerprintEntry> out;
  out.reserve(entries_.size() + other.entries_.size());
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() || b != other.entries_.end()) {
    if (b == other.entries_.end() || (a != entries_.end() && a->mac < b->mac)) {
      out.push_back(*a++);
    } else if (a == entries_.end() || b->mac < a->mac) {
      out.push_back(*b++);
    } else {
      const std::size_t count = a->count + b->count;
      const double mean =
          (a->mean_rssi * static_cast<double>(a->count) +
           b->mean_rssi * static_cast<double>(b->count)) /
          static_cast<double>(count);
      out.push_back({a->mac, mean, count});
      ++a;
      ++b;
    }
  }
  Fingerprint merged;
  merged.entries_ = std::move(out);
  return merged;
}

void ClusterParams::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "epsilon must lie in (0, 1]");
  }
  if (min_pts < 2) {
    throw Error(ErrorCode::InvalidParams, "min_pts must be at least 2");
  }
  if (scan_interval <= 0) {
    throw Error(ErrorCode::InvalidParams, "scan_interval must be positive");
  }
}

}  // namespace wifipoi
